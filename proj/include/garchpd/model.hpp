#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace garchpd {

inline constexpr int kDefaultMaxHorizon = 12;

// GJR-GARCH(1,1): x_t = sigma_t eps_t,
//   sigma_{t+1}^2 = omega + (alpha + lambda 1[x_t < 0]) x_t^2 + beta sigma_t^2.
// The conditioning state is either (sigma0_sq, x0_sq, sign0) or sigma1_sq
// directly; when sigma1_override is set the initial state is ignored.
struct GarchParams {
    double omega = 0;
    double alpha = 0;
    double beta = 0;
    double lambda = 0;
    double sigma0_sq = 1;
    double x0_sq = 0;
    int sign0 = 1;
    std::optional<double> sigma1_override;

    static GarchParams from_state(double omega, double alpha, double beta, double lambda,
                                  double sigma0_sq, double x0_sq, int sign0 = 1);
    static GarchParams from_sigma1(double omega, double alpha, double beta, double lambda,
                                   double sigma1_sq);

    // Throws DomainError when a constraint is violated.
    void validate() const;

    // alpha_t for the sign of x_t
    double alpha_at(int sign) const { return sign < 0 ? alpha + lambda : alpha; }
};

double sigma1_sq(const GarchParams& p);

enum class Validity { valid, invalid, unconditionally_valid };
std::string to_string(Validity v);

struct ValidityReport {
    double theta = 0;       // omega / (2 sigma1^2)
    double beta_lower = 0;  // -theta + sqrt(theta^2 + 2 theta)
    int h = 0;
    Validity status = Validity::valid;

    bool ok() const { return status != Validity::invalid; }
};

ValidityReport check_assumption1(const GarchParams& p, int h);

// min over 2 <= j <= h of  beta^j sigma1^2 - omega (1 - sum_{i=1}^{j-1} beta^i);
// nonnegative exactly when the inequality behind the horizon condition holds.
// Returns +inf for h < 2.
double beta_inequality_margin(const GarchParams& p, int h);

using SignVector = std::vector<int>;

// All 2^(h-1) sign vectors, lexicographic with +1 before -1.
std::vector<SignVector> enumerate_sign_vectors(int h, int max_h = kDefaultMaxHorizon);

struct Step {
    double x;
    double next_sigma_sq;
};
Step simulate_step(double sigma_sq, double eps, const GarchParams& p);

// Keys: omega, alpha, beta, lambda, sigma0_sq, x0_sq, sign0, sigma1_sq.
// Unknown keys are rejected. sigma1_sq excludes sigma0_sq/x0_sq/sign0.
GarchParams params_from_json(const nlohmann::json& j);
GarchParams load_params(const std::string& path);
nlohmann::json params_to_json(const GarchParams& p);

}  // namespace garchpd
