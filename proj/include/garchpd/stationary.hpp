#pragma once

#include <string>
#include <vector>

namespace garchpd {

struct KestenOptions {
    int gk_points = 31;     // 31 or 61 point Gauss-Kronrod
    double rel_tol = 1e-13;
};

// E((alpha eps^2 + beta)^kappa), eps ~ N(0,1), by quadrature over [0, inf).
double kesten_expectation(double alpha, double beta, double kappa, const KestenOptions& opt = {});

// Same expectation for integer kappa from the binomial expansion
//   sum_n C(kappa, n) alpha^n beta^(kappa-n) (2n-1)!!
double kesten_expectation_sum(double alpha, double beta, int kappa);

// E ln(alpha eps^2 + beta); a finite positive root exists only when negative.
double kesten_log_expectation(double alpha, double beta, const KestenOptions& opt = {});

enum class TailMethod { moment_sum, quadrature_root };
std::string to_string(TailMethod m);

struct TailIndexResult {
    double alpha = 0;
    double beta = 0;
    double kappa = 0;
    double residual = 0;
    TailMethod method = TailMethod::quadrature_root;
};

struct TailIndexOptions {
    double tol = 1e-8;
    double kappa_max = 50;
    KestenOptions kesten;
};

TailIndexResult tail_index(double alpha, double beta, const TailIndexOptions& opt = {});

struct LevelPoint {
    double ratio = 0;  // beta / alpha
    int kappa = 0;
    double alpha = 0;
    double beta = 0;
    bool solved = false;
};

// For each (ratio, kappa): beta with E((beta/ratio eps^2 + beta)^kappa) = 1.
std::vector<LevelPoint> level_grid(const std::vector<double>& ratios, const std::vector<int>& kappas);

std::string level_grid_csv(const std::vector<LevelPoint>& grid);

}  // namespace garchpd
