#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "garchpd/density.hpp"
#include "garchpd/errors.hpp"
#include "garchpd/model.hpp"
#include "garchpd/montecarlo.hpp"
#include "garchpd/risk.hpp"
#include "garchpd/specfun.hpp"
#include "garchpd/stationary.hpp"

namespace garchpd::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linton (2019) estimates; the default demo parameter set.
GarchParams linton_params() {
    const double w = 1.14e-5, a = 0.131007, b = 0.845708;
    return GarchParams::from_sigma1(w, a, b, 0, w / (1 - a - b));
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

struct Output {
    ojson meta = ojson::object();
    std::vector<std::string> columns;
    std::vector<std::vector<ojson>> rows;
};

std::string csv_cell(const ojson& v) {
    if (v.is_null()) return "NA";
    if (v.is_number_float()) return num(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::string render(const Output& o, const std::string& format) {
    std::ostringstream s;
    if (format == "json") {
        ojson doc;
        doc["meta"] = o.meta;
        doc["rows"] = ojson::array();
        for (const auto& row : o.rows) {
            ojson r = ojson::object();
            for (std::size_t i = 0; i < o.columns.size(); ++i) r[o.columns[i]] = row[i];
            doc["rows"].push_back(std::move(r));
        }
        s << doc.dump(2) << '\n';
        return s.str();
    }
    for (auto it = o.meta.begin(); it != o.meta.end(); ++it)
        s << "# " << it.key() << ": " << (it->is_string() ? it->get<std::string>() : it->dump()) << '\n';
    for (std::size_t i = 0; i < o.columns.size(); ++i) s << (i ? "," : "") << o.columns[i];
    s << '\n';
    for (const auto& row : o.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << csv_cell(row[i]);
        s << '\n';
    }
    return s.str();
}

struct Options {
    std::string params;
    int h = 2;
    std::vector<double> p{0.05, 0.025, 0.01, 0.005};
    std::vector<double> eta{0.05, 0.01};
    double a = 5;
    double R = 1e6;
    std::uint64_t seed = 42;
    int jmax = 100;
    std::string format = "csv";
    std::string out;
    bool force_range = false;
    std::string es_kernel = "pdf";
    int threads = 0;
    std::string cache;
    // per command
    int points = 601;
    double lo = -6, hi = 6;
    std::vector<double> at;
    bool raw = false;
    int max_m = 4;
    std::optional<double> alpha, beta;
    double kappa_max = 50;
    std::vector<double> ratios;
    std::vector<int> kappas;
    std::string dump;
    std::string in;
};

GarchParams load(const Options& o) {
    if (o.params.empty()) return linton_params();
    auto first = o.params.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && o.params[first] == '{') {
        try {
            return params_from_json(nlohmann::json::parse(o.params));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("inline parameters: ") + e.what());
        }
    }
    return load_params(o.params);
}

SeriesConfig series_config(const Options& o) {
    SeriesConfig c;
    c.j_max = o.jmax;
    c.j_cap = std::max(c.j_cap, o.jmax);
    c.threads = o.threads;
    return c;
}

std::shared_ptr<const CoefficientTable> read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return table_from_json(j);
}

std::shared_ptr<const CoefficientTable> table_for(const Options& o) {
    if (!o.cache.empty()) return read_table(o.cache);
    GarchParams p = load(o);
    p.validate();
    return build_table(p, o.h, series_config(o));
}

// The horizon condition is sufficient, not necessary, so a violation only
// adds a warning; hard failures surface as exceptions from the build.
void describe(Output& out, const CoefficientTable& t) {
    out.meta["params"] = ojson::parse(params_to_json(t.params).dump());
    out.meta["h"] = t.h;
    out.meta["j_max"] = t.j_max();
    out.meta["validity"] = to_string(t.validity.status);
    if (!t.validity.ok())
        out.meta["validity_warning"] = "beta below max(1/2, beta_lower): coefficient positivity not guaranteed";
    out.meta["scale"] = t.scale;
    out.meta["edge_error"] = t.edge_error;
}

std::uint64_t replications(double R) {
    if (!(R >= 1) || R != std::floor(R) || R > 1e15) throw UsageError("--R must be a positive integer");
    return static_cast<std::uint64_t>(R);
}

EsVarianceKernel kernel_of(const Options& o) {
    return o.es_kernel == "cdf" ? EsVarianceKernel::cdf : EsVarianceKernel::pdf;
}

std::vector<double> grid_points(const Options& o) {
    if (!o.at.empty()) return o.at;
    if (o.points < 2) throw UsageError("--points must be >= 2");
    if (!(o.hi > o.lo)) throw UsageError("--hi must exceed --lo");
    std::vector<double> g(o.points);
    for (int i = 0; i < o.points; ++i) g[i] = o.lo + (o.hi - o.lo) * i / (o.points - 1);
    return g;
}

Output cmd_curve(const Options& o, bool with_pdf) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    Output out;
    describe(out, *T);
    out.meta["units"] = o.raw ? "raw" : "standardized";
    out.columns = {"u"};
    if (with_pdf) out.columns.push_back("pdf");
    out.columns.push_back("cdf");
    bool flagged = false;
    for (double u : grid_points(o)) {
        Evaluation f = o.raw ? eval_pdf_x(*T, u) : st.eval_pdf(u);
        Evaluation F = o.raw ? eval_cdf_x(*T, u) : st.eval_cdf(u);
        if (f.outside_trust || F.outside_trust) {
            if (!o.force_range)
                throw DomainError("u = " + num(u) + " lies outside the trusted range; pass --force-range");
            flagged = true;
        }
        std::vector<ojson> row{u};
        if (with_pdf) row.push_back(f.value);
        row.push_back(F.value);
        out.rows.push_back(std::move(row));
    }
    if (flagged) out.meta["warning"] = "points outside the trusted range; accuracy not guaranteed";
    return out;
}

Output cmd_moments(const Options& o) {
    GarchParams p = load(o);
    p.validate();
    if (o.max_m < 1) throw UsageError("--m must be >= 1");
    Output out;
    out.meta["params"] = ojson::parse(params_to_json(p).dump());
    out.meta["h"] = o.h;
    out.columns = {"m", "moment", "standardized"};
    double var = moment(p, o.h, 1);
    for (int m = 1; m <= o.max_m; ++m) {
        double v = moment(p, o.h, m);
        out.rows.push_back({m, v, v / std::pow(var, m)});
    }
    return out;
}

Output cmd_var(const Options& o) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    Output out;
    describe(out, *T);
    out.columns = {"p", "var", "iterations", "newton_residual", "gaussian_var", "ratio_var"};
    for (double p : o.p) {
        RiskResult r = var_newton(st, p);
        double g = gaussian_reference(p).first;
        out.rows.push_back({p, r.var, r.iterations, r.newton_residual, g, r.var == 0 ? 1.0 : g / r.var});
    }
    return out;
}

Output cmd_es(const Options& o) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    Output out;
    describe(out, *T);
    out.columns = {"p", "es", "var", "quad_error", "gaussian_es", "ratio_es"};
    for (double p : o.p) {
        RiskResult r = risk_row(st, p);
        out.rows.push_back({p, r.es, r.var, r.quad_error, r.gaussian_es, r.ratio_es});
    }
    return out;
}

Output cmd_risk_table(const Options& o) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    Output out;
    describe(out, *T);
    out.columns = {"p", "var", "iterations", "gaussian_var", "ratio_var", "es", "gaussian_es", "ratio_es", "error"};
    for (double p : o.p) {
        try {
            RiskResult r = risk_row(st, p);
            out.rows.push_back({p, r.var, r.iterations, r.gaussian_var, r.ratio_var, r.es, r.gaussian_es,
                                r.ratio_es, ""});
        } catch (const std::exception& e) {
            out.rows.push_back({p, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, e.what()});
        }
    }
    return out;
}

Output cmd_mc_compare(const Options& o) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    const std::uint64_t R = replications(o.R);
    std::vector<double> x = simulate_terminal(T->params, T->h, R, o.seed, o.threads);
    if (!o.dump.empty()) write_sample(o.dump, x);
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] / st.scale;
    std::vector<double> sorted(z);
    std::sort(sorted.begin(), sorted.end());

    double gap = 0;
    for (int i = 0; i < 25; ++i) {
        double u = -3 + 0.25 * i;
        double ecdf = double(std::upper_bound(sorted.begin(), sorted.end(), u) - sorted.begin()) / double(R);
        gap = std::max(gap, std::fabs(ecdf - st.cdf(u)));
    }
    const double band = 3 * 1.36 / std::sqrt(double(R));

    Output out;
    describe(out, *T);
    out.meta["R"] = R;
    out.meta["seed"] = o.seed;
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(sample_digest(x)));
    out.meta["digest"] = digest;
    out.meta["sup_cdf_gap"] = gap;
    out.meta["cdf_band"] = band;
    out.meta["within_band"] = gap <= band;
    out.columns = {"quantity", "p", "exact", "mc", "se", "z"};
    for (double p : o.p) {
        RiskResult r = risk_row(st, p);
        double f = st.pdf(-r.var);
        double se_q = std::sqrt(p * (1 - p)) / (f * std::sqrt(double(R)));
        double q = -mc_quantile(z, p);
        out.rows.push_back({"var", p, r.var, q, se_q, (q - r.var) / se_q});
        // ES standard error from the sample variance of v = -z 1[z <= -Q]
        double s1 = 0, s2 = 0;
        for (double v : z)
            if (v <= -r.var) {
                s1 -= v;
                s2 += v * v;
            }
        double m1 = s1 / double(R), sd = std::sqrt(std::max(0.0, s2 / double(R) - m1 * m1));
        double se_es = sd / (p * std::sqrt(double(R)));
        double es = s1 > 0 ? mc_es(z, p, r.var) : std::nan("");
        out.rows.push_back({"es", p, r.es, es, se_es, (es - r.es) / se_es});
    }
    return out;
}

Output cmd_mc_plan(const Options& o) {
    auto T = table_for(o);
    StandardizedTable st = standardize(T);
    Output out;
    describe(out, *T);
    out.meta["a"] = o.a;
    out.meta["es_kernel"] = o.es_kernel;
    out.columns = {"eta", "p", "R_var", "R_es", "ci_len_var", "ci_len_es", "f_at_q", "V_sq"};
    for (double eta : o.eta)
        for (double p : o.p) {
            McPlan m = plan(st, p, eta, o.a, kernel_of(o));
            out.rows.push_back({eta, p, m.R_var, m.R_es, m.ci_len_var, m.ci_len_es, m.f_at_q, m.V_sq});
        }
    return out;
}

Output cmd_tail_index(const Options& o) {
    double alpha, beta;
    if (o.alpha && o.beta) {
        alpha = *o.alpha;
        beta = *o.beta;
    } else if (o.alpha || o.beta) {
        throw UsageError("--alpha and --beta go together");
    } else {
        GarchParams p = load(o);
        alpha = p.alpha;
        beta = p.beta;
    }
    TailIndexOptions opt;
    opt.kappa_max = o.kappa_max;
    TailIndexResult r = tail_index(alpha, beta, opt);
    Output out;
    out.columns = {"alpha", "beta", "kappa", "residual", "method"};
    out.rows.push_back({r.alpha, r.beta, r.kappa, r.residual, to_string(r.method)});
    return out;
}

Output cmd_level_grid(const Options& o) {
    std::vector<double> ratios = o.ratios;
    std::vector<int> kappas = o.kappas;
    if (ratios.empty())
        for (int i = 1; i <= 20; ++i) ratios.push_back(i);
    if (kappas.empty())
        for (int k = 1; k <= 10; ++k) kappas.push_back(k);
    Output out;
    out.columns = {"ratio", "kappa", "alpha", "beta"};
    for (const auto& pt : level_grid(ratios, kappas)) {
        if (pt.solved)
            out.rows.push_back({pt.ratio, pt.kappa, pt.alpha, pt.beta});
        else
            out.rows.push_back({pt.ratio, pt.kappa, nullptr, nullptr});
    }
    return out;
}

Output cmd_cache_inspect(const Options& o) {
    if (o.in.empty()) throw UsageError("coeff-cache inspect needs --in FILE");
    auto T = read_table(o.in);
    Output out;
    describe(out, *T);
    out.meta["engine_digits"] = T->engine_digits;
    out.meta["B"] = T->B;
    out.columns = {"j", "scaled_coeff", "error", "capped"};
    for (int j = 0; j <= T->j_max(); ++j)
        out.rows.push_back({j, T->scaled_coeff(j), T->error.empty() ? 0.0 : T->error[j],
                            T->capped.empty() ? 0 : T->capped[j]});
    return out;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open " + o.out + " for writing");
    f << text;
    if (!f) throw ResourceError("write failed: " + o.out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Exact prediction densities, VaR/ES and Monte Carlo checks for GARCH(1,1)/GJR"};
    app.set_help_flag("--help", "print help");  // -h would clash with --h
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--params", o.params, "parameter JSON file or inline JSON object");
    app.add_option("--h", o.h, "forecast horizon")->check(CLI::Range(1, 12));
    app.add_option("--p", o.p, "tail probabilities")->delimiter(',');
    app.add_option("--eta", o.eta, "CI miss probabilities")->delimiter(',');
    app.add_option("--a", o.a, "precision exponent: CI length <= 10^-a");
    app.add_option("--R", o.R, "Monte Carlo replications");
    app.add_option("--seed", o.seed, "Monte Carlo seed");
    app.add_option("--jmax", o.jmax, "outer series truncation")->check(CLI::Range(1, 800));
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", o.out, "output file (default stdout)");
    app.add_flag("--force-range", o.force_range, "allow points outside the trusted range");
    app.add_option("--es-kernel", o.es_kernel, "second tail moment kernel for the ES plan")
        ->check(CLI::IsMember({"pdf", "cdf"}));
    app.add_option("--threads", o.threads, "worker threads (0: all cores)");
    app.add_option("--cache", o.cache, "coefficient table written by coeff-cache build");

    auto curve_opts = [&](CLI::App* c) {
        c->add_option("--points", o.points, "grid size");
        c->add_option("--lo", o.lo, "grid start");
        c->add_option("--hi", o.hi, "grid end");
        c->add_option("--u", o.at, "explicit evaluation points")->delimiter(',');
        c->add_flag("--raw", o.raw, "points in units of x_h rather than standardized");
    };
    auto* density = app.add_subcommand("density", "pdf and cdf on a grid");
    curve_opts(density);
    auto* cdf = app.add_subcommand("cdf", "cdf on a grid");
    curve_opts(cdf);
    auto* moments = app.add_subcommand("moments", "even moments E x_h^(2m)");
    moments->add_option("--m", o.max_m, "highest order");
    auto* var = app.add_subcommand("var", "Value-at-Risk by Newton iteration");
    auto* es = app.add_subcommand("es", "Expected Shortfall");
    auto* risk = app.add_subcommand("risk-table", "VaR and ES with Gaussian comparison");
    auto* mc = app.add_subcommand("mc-compare", "Monte Carlo check of cdf, VaR and ES");
    mc->add_option("--dump", o.dump, "write the raw sample to this file");
    auto* mcplan = app.add_subcommand("mc-plan", "replications needed for a target CI length");
    auto* tail = app.add_subcommand("tail-index", "stationary tail index");
    tail->add_option("--alpha", o.alpha, "alpha (default from --params)");
    tail->add_option("--beta", o.beta, "beta (default from --params)");
    tail->add_option("--kappa-max", o.kappa_max, "upper end of the root search");
    auto* grid = app.add_subcommand("level-grid", "level curves of the tail index");
    grid->add_option("--ratios", o.ratios, "beta/alpha values")->delimiter(',');
    grid->add_option("--kappas", o.kappas, "integer tail indices")->delimiter(',');
    auto* cache = app.add_subcommand("coeff-cache", "build or inspect a coefficient table");
    cache->require_subcommand(1);
    auto* cache_build = cache->add_subcommand("build", "build a table and write it as JSON");
    auto* cache_inspect = cache->add_subcommand("inspect", "list the coefficients of a table");
    cache_inspect->add_option("--in", o.in, "table file")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (!o.cache.empty() && (app.count("--params") || app.count("--h")))
            throw UsageError("--cache fixes the parameters and horizon; drop --params/--h");
        if (cache_build->parsed()) {
            if (!o.cache.empty()) throw UsageError("coeff-cache build takes --params/--h, not --cache");
            auto T = table_for(o);
            emit(o, table_to_json(*T).dump() + "\n", out);
            return kOk;
        }
        Output result;
        if (density->parsed())
            result = cmd_curve(o, true);
        else if (cdf->parsed())
            result = cmd_curve(o, false);
        else if (moments->parsed())
            result = cmd_moments(o);
        else if (var->parsed())
            result = cmd_var(o);
        else if (es->parsed())
            result = cmd_es(o);
        else if (risk->parsed())
            result = cmd_risk_table(o);
        else if (mc->parsed())
            result = cmd_mc_compare(o);
        else if (mcplan->parsed())
            result = cmd_mc_plan(o);
        else if (tail->parsed())
            result = cmd_tail_index(o);
        else if (grid->parsed())
            result = cmd_level_grid(o);
        else if (cache_inspect->parsed())
            result = cmd_cache_inspect(o);
        emit(o, render(result, o.format), out);
        return kOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace garchpd::cli
