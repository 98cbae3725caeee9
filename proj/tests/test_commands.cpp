#include "confine/commands.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace confine;

namespace {

RunConfig config(const std::string& text) {
    RunConfig c = RunConfig::from_toml(text);
    c.numerics.jobs = 2;
    return c;
}

std::string csv(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("classify exit codes") {
    auto lp = run_command(config("command = \"classify\"\n[problem.v1]\nfamily = \"power\"\nparams = [0.6, 0.6]\n"));
    CHECK(lp.exit_code == kExitPass);
    CHECK(lp.report["result"]["verdict"] == "ESA");
    CHECK(lp.text.find("P:M(ii)") != std::string::npos);

    auto electric = run_command(config("command = \"classify\"\n[problem.v0]\nfamily = \"constant\"\nparams = [1.0]\n"));
    CHECK(electric.exit_code == kExitFail);
    CHECK(electric.text.find("L:NES") != std::string::npos);

    auto chernoff = run_command(config("command = \"classify\"\n[problem]\ndomain = \"real_line\"\n"
                                       "[problem.v1]\nfamily = \"chernoff\"\nparams = [1.5]\n"));
    CHECK(chernoff.exit_code == kExitFail);
    CHECK(chernoff.text.find("Comment3") != std::string::npos);

    CHECK_THROWS_AS(run_command(config("command = \"frobnicate\"\n")), ConfigError);
}

TEST_CASE("power sweep flips at one half") {
    RunConfig c = config("command = \"sweep\"\n[sweep]\naxes = [\"lambda1\"]\nlambda1 = [0.3, 0.7, 0.01]\n");
    SweepResult r = run_sweep(c);
    CHECK(r.model == "power");
    REQUIRE(r.cells.size() == 41u);
    for (const auto& cell : r.cells) {
        double l = cell.params[0];
        CAPTURE(l);
        if (l == 0.5) {
            CHECK(cell.verdict == std::string("Boundary"));
        } else {
            CHECK(cell.verdict == std::string(l > 0.5 ? "ESA" : "NotESA"));
        }
    }
    std::string text = csv(r);
    CHECK(text.rfind("param1,param2,verdict,tag,margin\n", 0) == 0);
    CHECK(text.find("\n0.35,,") != std::string::npos);
}

TEST_CASE("sweeps are deterministic across job counts") {
    RunConfig c = config("command = \"sweep\"\n[sweep]\nmodel = \"em\"\naxes = [\"lambda_m\", \"lambda_e\"]\n"
                         "lambda_m = [0.0, 1.0, 0.1]\nlambda_e = [0.0, 1.0, 0.1]\n");
    c.numerics.jobs = 1;
    SweepResult one = run_sweep(c);
    c.numerics.jobs = 4;
    SweepResult four = run_sweep(c);
    CHECK(csv(one) == csv(four));
    CHECK(to_json(one).dump() == to_json(four).dump());
    CHECK(one.cells.size() == 121u);
    // row-major, last axis fastest
    CHECK(one.cells[1].params[0] == 0.0);
    CHECK(one.cells[1].params[1] == 0.1);
}

TEST_CASE("em sweep cells follow the analytic curve") {
    const double step = 0.05;
    RunConfig c = config("command = \"sweep\"\n[sweep]\nmodel = \"em\"\naxes = [\"lambda_m\", \"lambda_e\"]\n"
                         "lambda_m = [0.0, 1.5, 0.05]\nlambda_e = [0.0, 1.5, 0.05]\n");
    auto cells = run_sweep(c).cells;
    CHECK(cells.size() == 31u * 31u);
    for (const auto& cell : cells) {
        double lm = cell.params[0], le = cell.params[1];
        double gap = le * le - (lm * lm - 0.25);
        // half a step in each parameter moves the gap by at most this much
        double band = 0.5 * step * (2.0 * lm + 2.0 * le);
        CAPTURE(lm);
        CAPTURE(le);
        if (std::abs(gap) > 1.01 * band)
            CHECK(cell.verdict == std::string(gap <= 0.0 ? "ESA" : "NotESA"));
        else if (std::abs(gap) < 0.99 * band)
            CHECK(cell.verdict == std::string("Boundary"));
    }
}

TEST_CASE("sweep model selection") {
    SweepConfig s;
    s.axes = {SweepAxis{"alpha", 0.0, 1.0, 0.1}};
    CHECK(sweep_model(s) == "pcm");
    s.axes = {SweepAxis{"lambda_e", 0.0, 1.0, 0.1}};
    CHECK(sweep_model(s) == "em");
    s.axes = {SweepAxis{"lambda1", 0.0, 1.0, 0.1}};
    CHECK(sweep_model(s) == "power");
    s.model = "chernoff";
    s.axes = {SweepAxis{"alpha", 0.0, 2.0, 0.5}};
    CHECK(sweep_model(s) == "chernoff");
}

TEST_CASE("certify and identity-check exit codes") {
    auto flat = run_command(config("command = \"certify\"\n[problem]\ndomain = \"unit_ball\"\n"
                                   "[certify]\nkind = \"flat_threshold\"\nlambda = 0.5\n"));
    CHECK(flat.exit_code == kExitPass);

    auto low = run_command(config("command = \"certify\"\n[problem]\ndomain = \"unit_ball\"\n"
                                  "[certify]\nkind = \"flat_threshold\"\nlambda = 0.3\n"));
    CHECK(low.exit_code == kExitFail);

    CHECK_THROWS_AS(run_command(config("command = \"certify\"\n[problem]\ndomain = \"unit_ball\"\n"
                                       "[certify]\nkind = \"scalar\"\nstructure = \"identity\"\n")),
                    RejectedInput);

    auto dv = run_command(config("command = \"certify\"\n[certify]\nkind = \"distance_verdict\"\n"
                                 "lambda = 0.5\nconvex_flat = false\n"));
    CHECK(dv.exit_code == kExitFail);

    auto id = run_command(config("command = \"identity-check\"\n"));
    CHECK(id.exit_code == kExitPass);
}

TEST_CASE("fibers command reports the failing fiber") {
    auto r = run_command(config("command = \"fibers\"\n[magnetic]\nfield = \"critical_family\"\nstrength = 0.25\n"));
    CHECK(r.exit_code == kExitFail);
    CHECK(r.report["result"]["table"]["failing_fiber"] == -1);
}

TEST_CASE("report JSON has no timings") {
    auto r = run_command(config("command = \"sweep\"\n[sweep]\naxes = [\"lambda1\"]\nlambda1 = [0.3, 0.4, 0.1]\n"));
    CHECK(r.report.dump().find("seconds") == std::string::npos);
}
