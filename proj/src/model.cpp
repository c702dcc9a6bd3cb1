#include "garchpd/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "garchpd/errors.hpp"

namespace garchpd {

GarchParams GarchParams::from_state(double omega, double alpha, double beta, double lambda,
                                    double sigma0_sq, double x0_sq, int sign0) {
    GarchParams p;
    p.omega = omega;
    p.alpha = alpha;
    p.beta = beta;
    p.lambda = lambda;
    p.sigma0_sq = sigma0_sq;
    p.x0_sq = x0_sq;
    p.sign0 = sign0;
    p.validate();
    return p;
}

GarchParams GarchParams::from_sigma1(double omega, double alpha, double beta, double lambda,
                                     double s1) {
    GarchParams p;
    p.omega = omega;
    p.alpha = alpha;
    p.beta = beta;
    p.lambda = lambda;
    p.sigma1_override = s1;
    p.validate();
    return p;
}

void GarchParams::validate() const {
    auto pos = [](double v) { return std::isfinite(v) && v > 0; };
    if (!pos(omega) || !pos(alpha) || !pos(beta))
        throw DomainError("omega, alpha and beta must be positive");
    if (!std::isfinite(lambda) || lambda < 0) throw DomainError("lambda must be nonnegative");
    if (sign0 != 1 && sign0 != -1) throw DomainError("sign0 must be +1 or -1");
    if (sigma1_override) {
        if (!std::isfinite(*sigma1_override) || !(*sigma1_override > omega))
            throw DomainError("sigma1_sq must exceed omega");
    } else {
        if (!pos(sigma0_sq)) throw DomainError("sigma0_sq must be positive");
        if (!std::isfinite(x0_sq) || x0_sq < 0) throw DomainError("x0_sq must be nonnegative");
    }
}

double sigma1_sq(const GarchParams& p) {
    if (p.sigma1_override) return *p.sigma1_override;
    return p.omega + p.beta * p.sigma0_sq + p.alpha_at(p.sign0) * p.x0_sq;
}

std::string to_string(Validity v) {
    switch (v) {
        case Validity::valid: return "valid";
        case Validity::invalid: return "invalid";
        case Validity::unconditionally_valid: return "unconditionally_valid";
    }
    return "?";
}

ValidityReport check_assumption1(const GarchParams& p, int h) {
    ValidityReport r;
    r.h = h;
    r.theta = p.omega / (2 * sigma1_sq(p));
    r.beta_lower = -r.theta + std::sqrt(r.theta * r.theta + 2 * r.theta);
    if (h <= 2)
        r.status = Validity::unconditionally_valid;
    else if (h == 3)
        r.status = p.beta >= r.beta_lower ? Validity::valid : Validity::invalid;
    else
        r.status = p.beta >= std::max(0.5, r.beta_lower) ? Validity::valid : Validity::invalid;
    return r;
}

double beta_inequality_margin(const GarchParams& p, int h) {
    double best = std::numeric_limits<double>::infinity();
    const double s1 = sigma1_sq(p);
    double bj = p.beta, partial = 0;  // partial = sum_{i=1}^{j-1} beta^i
    for (int j = 2; j <= h; ++j) {
        partial += bj;
        bj *= p.beta;
        best = std::min(best, bj * s1 - p.omega * (1 - partial));
    }
    return best;
}

std::vector<SignVector> enumerate_sign_vectors(int h, int max_h) {
    if (h < 1) throw DomainError("horizon must be >= 1");
    if (h > max_h) throw ResourceError("horizon " + std::to_string(h) + " exceeds cap " + std::to_string(max_h));
    const int len = h - 1;
    std::vector<SignVector> out;
    out.reserve(std::size_t(1) << len);
    for (unsigned long mask = 0; mask < (1ul << len); ++mask) {
        SignVector s(len);
        // leading bit is the first entry, 0 -> +1
        for (int i = 0; i < len; ++i) s[i] = (mask >> (len - 1 - i)) & 1 ? -1 : 1;
        out.push_back(std::move(s));
    }
    return out;
}

Step simulate_step(double sigma_sq, double eps, const GarchParams& p) {
    double x = std::sqrt(sigma_sq) * eps;
    return {x, p.omega + p.alpha_at(x < 0 ? -1 : 1) * x * x + p.beta * sigma_sq};
}

GarchParams params_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {"omega", "alpha", "beta", "lambda", "sigma0_sq",
                                                "x0_sq", "sign0", "sigma1_sq"};
    if (!j.is_object()) throw FormatError("parameter document must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw FormatError("unknown parameter key: " + it.key());
    auto num = [&](const char* k) {
        if (!j.contains(k)) throw FormatError(std::string("missing parameter: ") + k);
        if (!j.at(k).is_number()) throw FormatError(std::string("not a number: ") + k);
        return j.at(k).get<double>();
    };
    auto opt = [&](const char* k, double def) { return j.contains(k) ? num(k) : def; };

    double lambda = opt("lambda", 0.0);
    if (j.contains("sigma1_sq")) {
        for (const char* k : {"sigma0_sq", "x0_sq", "sign0"})
            if (j.contains(k))
                throw FormatError(std::string("sigma1_sq cannot be combined with ") + k);
        return GarchParams::from_sigma1(num("omega"), num("alpha"), num("beta"), lambda,
                                        num("sigma1_sq"));
    }
    int sign0 = 1;
    if (j.contains("sign0")) {
        if (!j.at("sign0").is_number_integer()) throw FormatError("sign0 must be +1 or -1");
        sign0 = j.at("sign0").get<int>();
    }
    return GarchParams::from_state(num("omega"), num("alpha"), num("beta"), lambda,
                                   num("sigma0_sq"), num("x0_sq"), sign0);
}

GarchParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open parameter file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return params_from_json(j);
}

nlohmann::json params_to_json(const GarchParams& p) {
    nlohmann::json j;
    j["omega"] = p.omega;
    j["alpha"] = p.alpha;
    j["beta"] = p.beta;
    j["lambda"] = p.lambda;
    if (p.sigma1_override) {
        j["sigma1_sq"] = *p.sigma1_override;
    } else {
        j["sigma0_sq"] = p.sigma0_sq;
        j["x0_sq"] = p.x0_sq;
        j["sign0"] = p.sign0;
    }
    return j;
}

}  // namespace garchpd
