#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    int c = garchpd::cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::vector<std::string> data_lines(const std::string& s) {
    std::vector<std::string> v;
    for (auto& l : lines(s))
        if (l.rfind("#", 0) != 0) v.push_back(l);
    return v;
}

std::string config(const char* name) {
    return std::string(GARCHPD_CONFIG_DIR) + "/" + name;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("exit codes") {
        CHECK(run({}).code == 1);
        CHECK(run({"no-such-command"}).code == 1);
        CHECK(run({"var", "--jmax", "0"}).code == 1);
        CHECK(run({"var", "--format", "xml"}).code == 1);
        CHECK(run({"--help"}).code == 0);
        CHECK(run({"var", "--p", "0.7"}).code == 2);
        CHECK(run({"density", "--u", "7"}).code == 2);
        CHECK(run({"var", "--params", "/nonexistent.json"}).code != 0);
        CHECK(run({"var", "--params", "{\"omega\": 1"}).code == 1);
        auto r = run({"mc-compare", "--R", "0"});
        CHECK(r.code == 1);
        CHECK(r.err.find("--R") != std::string::npos);
    }

    TEST_CASE("risk-table defaults reproduce the Linton table") {
        auto r = run({"risk-table"});
        REQUIRE(r.code == 0);
        auto d = data_lines(r.out);
        REQUIRE(d.size() == 5);
        CHECK(d[0] == "p,var,iterations,gaussian_var,ratio_var,es,gaussian_es,ratio_es,error");
        CHECK(d[1].rfind("0.05,1.641", 0) == 0);
        CHECK(r.out.find("# h: 2") != std::string::npos);
        CHECK(r.out.find("# validity: unconditionally_valid") != std::string::npos);
    }

    TEST_CASE("runs are byte-identical") {
        auto a = run({"risk-table", "--h", "3"});
        auto b = run({"risk-table", "--h", "3"});
        CHECK(a.out == b.out);
        auto m1 = run({"mc-compare", "--R", "20000", "--threads", "1"});
        auto m3 = run({"mc-compare", "--R", "20000", "--threads", "3"});
        REQUIRE(m1.code == 0);
        CHECK(m1.out == m3.out);
    }

    TEST_CASE("json and csv carry the same numbers") {
        auto c = run({"var", "--format", "csv"});
        auto j = run({"var", "--format", "json"});
        REQUIRE(j.code == 0);
        auto doc = nlohmann::json::parse(j.out);
        auto d = data_lines(c.out);
        REQUIRE(doc["rows"].size() + 1 == d.size());
        for (std::size_t i = 0; i < doc["rows"].size(); ++i) {
            double v = doc["rows"][i]["var"];
            std::istringstream row(d[i + 1]);
            std::string p, var;
            std::getline(row, p, ',');
            std::getline(row, var, ',');
            CHECK(std::stod(var) == v);
        }
        CHECK(doc["meta"]["h"] == 2);
    }

    TEST_CASE("h=1 ratios are one") {
        auto r = run({"risk-table", "--h", "1", "--format", "json"});
        REQUIRE(r.code == 0);
        for (auto& row : nlohmann::json::parse(r.out)["rows"]) {
            CHECK(double(row["ratio_var"]) == doctest::Approx(1).epsilon(1e-9));
            CHECK(double(row["ratio_es"]) == doctest::Approx(1).epsilon(1e-6));
        }
    }

    TEST_CASE("median") {
        auto r = run({"var", "--p", "0.5", "--format", "json"});
        REQUIRE(r.code == 0);
        auto row = nlohmann::json::parse(r.out)["rows"][0];
        CHECK(double(row["var"]) == 0);
        CHECK(int(row["iterations"]) == 0);
    }

    TEST_CASE("parameter files and inline parameters") {
        auto f = run({"moments", "--params", config("sym.json"), "--h", "2", "--m", "2", "--format", "json"});
        auto i = run({"moments", "--params", R"({"omega":0.1,"alpha":0.1,"beta":0.7,"lambda":0,"sigma0_sq":1,"x0_sq":1})",
                      "--h", "2", "--m", "2", "--format", "json"});
        REQUIRE(f.code == 0);
        REQUIRE(i.code == 0);
        CHECK(f.out == i.out);
        CHECK(double(nlohmann::json::parse(f.out)["rows"][0]["moment"]) == doctest::Approx(0.82));
        auto g = run({"density", "--params", config("gjr.json"), "--h", "3", "--points", "5"});
        CHECK(g.code == 0);
        CHECK(data_lines(g.out).size() == 6);
    }

    TEST_CASE("density grid and trust range") {
        auto r = run({"density", "--points", "11", "--lo", "-1", "--hi", "1"});
        REQUIRE(r.code == 0);
        auto d = data_lines(r.out);
        CHECK(d.size() == 12);
        CHECK(d[0] == "u,pdf,cdf");
        CHECK(d[6].rfind("0,", 0) == 0);
        auto forced = run({"density", "--u", "7", "--force-range"});
        CHECK(forced.code == 0);
        CHECK(forced.out.find("# warning:") != std::string::npos);
    }

    TEST_CASE("coefficient cache round trip") {
        auto path = (std::filesystem::temp_directory_path() / "garchpd_cli_cache.json").string();
        REQUIRE(run({"coeff-cache", "build", "--params", config("gjr.json"), "--h", "3", "--out", path}).code == 0);
        auto fresh = run({"risk-table", "--params", config("gjr.json"), "--h", "3"});
        auto cached = run({"risk-table", "--cache", path});
        REQUIRE(cached.code == 0);
        CHECK(data_lines(cached.out) == data_lines(fresh.out));
        auto ins = run({"coeff-cache", "inspect", "--in", path});
        REQUIRE(ins.code == 0);
        CHECK(data_lines(ins.out)[0] == "j,scaled_coeff,error,capped");
        // one row per coefficient, j = 0..j_max
        auto jm = ins.out.find("# j_max: ");
        REQUIRE(jm != std::string::npos);
        CHECK(data_lines(ins.out).size() == std::size_t(std::stoi(ins.out.substr(jm + 9)) + 2));
        CHECK(run({"risk-table", "--cache", path, "--h", "2"}).code == 1);
        {
            std::ofstream f(path, std::ios::trunc);
            f << "{broken";
        }
        CHECK(run({"risk-table", "--cache", path}).code == 1);
        std::filesystem::remove(path);
    }

    TEST_CASE("mc-plan") {
        auto r = run({"mc-plan", "--p", "0.05", "--eta", "0.05", "--es-kernel", "cdf", "--format", "json"});
        REQUIRE(r.code == 0);
        auto row = nlohmann::json::parse(r.out)["rows"][0];
        CHECK(double(row["R_var"]) == doctest::Approx(7.0710e11).epsilon(5e-5));
        CHECK(double(row["R_es"]) == doctest::Approx(5.0484e12).epsilon(5e-5));
    }

    TEST_CASE("tail index and level grid") {
        auto t = run({"tail-index", "--alpha", "0.2", "--beta", "0.8", "--format", "json"});
        REQUIRE(t.code == 0);
        CHECK(double(nlohmann::json::parse(t.out)["rows"][0]["kappa"]) == doctest::Approx(1).epsilon(1e-8));
        CHECK(run({"tail-index", "--alpha", "0.2"}).code == 1);
        CHECK(run({"tail-index", "--alpha", "0.6", "--beta", "0.9"}).code == 2);
        auto g = run({"level-grid"});
        REQUIRE(g.code == 0);
        CHECK(data_lines(g.out).size() == 1 + 200);
        auto s = run({"level-grid", "--ratios", "1,2", "--kappas", "1,2,3"});
        CHECK(data_lines(s.out).size() == 7);
    }

    TEST_CASE("output file") {
        auto path = (std::filesystem::temp_directory_path() / "garchpd_cli_out.csv").string();
        auto r = run({"var", "--out", path});
        REQUIRE(r.code == 0);
        CHECK(r.out.empty());
        std::ifstream f(path);
        std::stringstream s;
        s << f.rdbuf();
        CHECK(s.str() == run({"var"}).out);
        std::filesystem::remove(path);
    }
}
