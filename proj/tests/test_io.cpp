#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "parastab/cli.hpp"
#include "parastab/io.hpp"
#include "parastab/rng.hpp"

#include <cstdio>
#include <filesystem>

using namespace parastab;

namespace {
std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

int cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"parastab"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}
} // namespace

TEST_CASE("csv formatting uses 17 significant digits and a header") {
    const std::string csv = csv_table({"a", "b"}, {{0.1, 2.0}, {1.0 / 3.0, 1e-300}});
    CHECK(csv.substr(0, 4) == "a,b\n");
    CHECK(csv.find("0.10000000000000001") != std::string::npos);
    CHECK(csv.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("key-value round trip") {
    const auto text = kv_serialize({{"omega", "0.4"}, {"M", "194.3"}});
    const auto kv = kv_parse(text);
    CHECK(kv.at("omega") == "0.4");
    CHECK(kv.at("M") == "194.3");
}

TEST_CASE("sidecar binary round trip is bit exact") {
    Domain1D neu{1.0, Boundary::Neumann};
    Rng rng(5);
    WeightedTrajectory traj;
    traj.weight = 0.35;
    for (int i = 0; i < 5; ++i) {
        traj.times.push_back(0.1 * (i + 1));
        SystemField s = zero_system(neu, 2, 7);
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 7; ++k)
                s.comp[c].coeff[k] = rng.normal() * std::pow(10.0, rng.uniform(-200.0, 200.0));
        traj.states.push_back(s);
    }
    const std::string path = tmp_path("parastab_sidecar_test.bin");
    write_sidecar(path, traj);
    const auto back = read_sidecar(path, neu);
    REQUIRE(back.times.size() == traj.times.size());
    CHECK(back.weight == traj.weight);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        CHECK(back.times[i] == traj.times[i]);
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 7; ++k)
                CHECK(back.states[i].comp[c].coeff[k] == traj.states[i].comp[c].coeff[k]);
    }
    std::remove(path.c_str());
}

TEST_CASE("svg chart is a standalone document") {
    const auto svg = svg_line_chart({{"n", {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.1}}}}, "decay", true);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("cli runs end to end") {
    SUBCASE("critical prints the exponent") { CHECK(cli({"critical", "--q", "2", "--gamma", "0.1", "--xi", "0.65"}) == 0); }

    SUBCASE("bad kappa is a configuration error") {
        CHECK(cli({"simulate", "--problem", "chemotaxis", "--chi", "2", "--kappa", "-1"}) == 2);
    }

    SUBCASE("unknown flag is a configuration error") {
        CHECK(cli({"critical", "--q", "2", "--gamma", "0.1", "--xi", "0.65", "--bogus", "1"}) == 2);
    }

    SUBCASE("unknown config-file key is a configuration error naming the key") {
        const std::string cfg = tmp_path("parastab_bad.cfg");
        write_file(cfg, "q = 2\ngamma = 0.1\nxi = 0.65\nbogus_key = 7\n");
        CHECK(cli({"critical", "--config", cfg.c_str()}) == 2);
        std::remove(cfg.c_str());
    }

    SUBCASE("config file provides values, flags take precedence") {
        const std::string cfg = tmp_path("parastab_ok.cfg");
        write_file(cfg, "q = 2\ngamma = 0.1\nxi = 0.65\n");
        CHECK(cli({"critical", "--config", cfg.c_str()}) == 0);
        CHECK(cli({"critical", "--config", cfg.c_str(), "--xi", "0.7"}) == 0);
        std::remove(cfg.c_str());
    }

    SUBCASE("dry run reports the resolved configuration without computing") {
        CHECK(cli({"simulate", "--problem", "chemotaxis", "--K", "131072", "--dry-run"}) == 0);
    }

    SUBCASE("dispersion table has the requested rows") {
        const std::string out = tmp_path("parastab_disp.csv");
        CHECK(cli({"dispersion", "--chi", "2", "--kappa", "0.5", "--modes", "8", "--out",
                   out.c_str()}) == 0);
        const std::string csv = read_file(out);
        CHECK(csv.find("mode,lambda,re_eig1,im_eig1,re_eig2,im_eig2\n") == 0);
        int lines = 0;
        for (char ch : csv)
            if (ch == '\n')
                ++lines;
        CHECK(lines == 9); // header + 8 modes
        CHECK(csv.find("-0.5") != std::string::npos);
        std::remove(out.c_str());
    }

    SUBCASE("deterministic replay produces byte-identical csv") {
        const std::string o1 = tmp_path("parastab_rep1.csv");
        const std::string o2 = tmp_path("parastab_rep2.csv");
        for (const std::string& o : {o1, o2})
            CHECK(cli({"simulate", "--problem", "chemotaxis", "--K", "16", "--T", "2", "--N", "64",
                       "--seed", "77", "--out", o.c_str()}) == 0);
        CHECK(read_file(o1) == read_file(o2));
        CHECK(read_file(o1).find("t,h0_0,halpha_0,hxi_0,h0_1,halpha_1,hxi_1,f_norm,margin\n") == 0);
        std::remove(o1.c_str());
        std::remove(o2.c_str());
    }

    SUBCASE("scan emits cells in grid order regardless of thread schedule") {
        const std::string o1 = tmp_path("parastab_scan1.csv");
        const std::string o2 = tmp_path("parastab_scan2.csv");
        setenv("PARASTAB_THREADS", "2", 1);
        CHECK(cli({"scan", "--chi-grid", "0.5,1.0", "--kappa-grid", "0.3,0.5,1", "--K", "16",
                   "--out", o1.c_str()}) == 0);
        setenv("PARASTAB_THREADS", "1", 1);
        CHECK(cli({"scan", "--chi-grid", "0.5,1.0", "--kappa-grid", "0.3,0.5,1", "--K", "16",
                   "--out", o2.c_str()}) == 0);
        unsetenv("PARASTAB_THREADS");
        CHECK(read_file(o1) == read_file(o2));
        std::remove(o1.c_str());
        std::remove(o2.c_str());
    }

    SUBCASE("simulate writes svg and a bit-exact sidecar") {
        const std::string csv = tmp_path("parastab_sim.csv");
        const std::string svg = tmp_path("parastab_sim.svg");
        const std::string bin = tmp_path("parastab_sim.bin");
        CHECK(cli({"simulate", "--problem", "chemotaxis", "--K", "8", "--T", "1", "--N", "32",
                   "--quiet", "--out", csv.c_str(), "--svg", svg.c_str(), "--sidecar",
                   bin.c_str()}) == 0);
        CHECK(read_file(svg).find("<svg") == 0);
        const auto traj = read_sidecar(bin, Domain1D{1.0, Boundary::Neumann});
        CHECK(traj.times.size() == 33);
        CHECK(traj.states.front().size() == 2);
        CHECK(traj.states.front().truncation() == 8);
        for (const auto& p : {csv, svg, bin})
            std::remove(p.c_str());
    }

    SUBCASE("fit reports a decay rate near the spectral bound") {
        // in-process: capture not needed, just exercise the path and exit code
        CHECK(cli({"fit", "--problem", "chemotaxis", "--K", "16", "--T", "12", "--N", "512",
                   "--quiet", "--window-lo", "5", "--window-hi", "11"}) == 0);
    }

    SUBCASE("basin writes a certificate file") {
        const std::string out = tmp_path("parastab_cert.kv");
        CHECK(cli({"basin", "--problem", "chemotaxis", "--K", "16", "--omega", "0.4", "--quiet",
                   "--out", out.c_str()}) == 0);
        const auto kv = kv_parse(read_file(out));
        CHECK(kv.at("empirical") == "0");
        CHECK(std::stod(kv.at("epsilon0")) > 0.0);
        CHECK(std::stod(kv.at("M")) >= 1.0);
        CHECK(std::stod(kv.at("c0")) > 1.0);
        CHECK(kv.at("gate_passed") == "1");

        // certificate file feeds verify-estimate
        CHECK(cli({"verify-estimate", "--problem", "chemotaxis", "--K", "16", "--T", "8", "--N",
                   "256", "--quiet", "--basin-file", out.c_str()}) == 0);
        std::remove(out.c_str());
    }

    SUBCASE("basin on the quasilinear problem reports empirical constants") {
        const std::string out = tmp_path("parastab_cert_q.kv");
        CHECK(cli({"basin", "--problem", "gradient", "--kappa", "4", "--K", "24", "--T", "1",
                   "--N", "128", "--quiet", "--amplitude", "0.02", "--out", out.c_str()}) == 0);
        const auto kv = kv_parse(read_file(out));
        CHECK(kv.at("empirical") == "1");
        CHECK(std::stod(kv.at("omega_hat")) > 0.0);
        std::remove(out.c_str());
    }

    SUBCASE("instability subcommand flags escape") {
        CHECK(cli({"instability", "--problem", "chemotaxis", "--equilibrium", "zero", "--kappa",
                   "0.7", "--K", "8", "--quiet", "--deltas", "1e-2,1e-3", "--tmax", "30"}) == 0);
    }

    SUBCASE("profile and scaling subcommands") {
        CHECK(cli({"profile", "--kind", "chemotaxis", "--epsilon", "0.3", "--p", "4", "--quiet"}) ==
              0);
        CHECK(cli({"profile", "--kind", "gradient", "--tau", "0.275", "--p", "2.5", "--kappa", "4",
                   "--quiet"}) == 0);
        CHECK(cli({"profile", "--kind", "chemotaxis", "--epsilon", "0.45", "--p", "2"}) == 2);
        CHECK(cli({"scaling", "--n", "1", "--p", "2.5", "--kappa", "4", "--tau", "0.275",
                   "--quiet"}) == 0);
        CHECK(cli({"spectrum", "--problem", "chemotaxis", "--chi", "2", "--kappa", "0.5", "--K",
                   "32", "--quiet"}) == 0);
    }

    SUBCASE("verify-estimate exit code reflects the margin") {
        CHECK(cli({"verify-estimate", "--problem", "chemotaxis", "--K", "16", "--T", "6", "--N",
                   "256", "--omega", "0.4", "--M", "200"}) == 0);
        CHECK(cli({"verify-estimate", "--problem", "chemotaxis", "--K", "16", "--T", "6", "--N",
                   "256", "--omega", "0.4", "--M", "0.0001"}) == 1);
    }

    SUBCASE("blow-up where stability was asserted is a numeric failure") {
        CHECK(cli({"simulate", "--problem", "quadratic", "--unstable", "--kappa", "0.3", "--K",
                   "8", "--T", "60", "--N", "2048", "--perturb", "1e-3", "--quiet",
                   "--expect-stable"}) == 1);
    }
}
