#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <numbers>

#include "compet/freqeval.hpp"
#include "compet/sim.hpp"
#include "compet/synthesis.hpp"
#include "helpers.hpp"

using namespace compet;
using testutil::Rng;

TEST_CASE("sine generator hits the quarter-period lattice") {
    const DisturbanceSpec spec = DisturbanceSpec::sine(std::numbers::pi / 2.0, 1.0, 8);
    const double expected[4] = {0.0, 1.0, 0.0, -1.0};
    for (long t = 0; t < 4; ++t) {
        const Vector w = gen_disturbance(spec, 3, t);
        for (Eigen::Index i = 0; i < 3; ++i)
            CHECK(w(i) == doctest::Approx(expected[t]).epsilon(1e-12));
    }
}

TEST_CASE("gaussian generator is a pure function of seed and time") {
    const DisturbanceSpec a = DisturbanceSpec::gaussian(99, 100);
    const DisturbanceSpec b = DisturbanceSpec::gaussian(99, 100);
    const DisturbanceSpec c = DisturbanceSpec::gaussian(100, 100);
    double sum = 0.0, sumsq = 0.0;
    const long N = 20000;
    for (long t = 0; t < N; ++t) {
        const Vector wa = gen_disturbance(a, 2, t);
        CHECK((wa - gen_disturbance(b, 2, t)).norm() == 0.0);
        sum += wa.sum();
        sumsq += wa.squaredNorm();
    }
    CHECK((gen_disturbance(a, 2, 5) - gen_disturbance(c, 2, 5)).norm() > 1e-8);
    const double mean = sum / (2 * N);
    const double var = sumsq / (2 * N) - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("file disturbances: parsing, dimension check, exhaustion") {
    const std::string path = "/tmp/compet_test_dist.txt";
    {
        std::ofstream out(path);
        out << "# two channels\n1 2\n3 4\n";
    }
    const DisturbanceSpec spec = DisturbanceSpec::from_file(path, 2);
    CHECK(spec.horizon == 2);
    CHECK(gen_disturbance(spec, 2, 1)(1) == doctest::Approx(4.0));
    CHECK_THROWS_AS(gen_disturbance(spec, 2, 2), FileExhausted);
    CHECK_THROWS_AS(DisturbanceSpec::from_file(path, 3), DimensionMismatch);
    std::remove(path.c_str());
}

TEST_CASE("zero forcing keeps the loop at rest") {
    Rng rng(601);
    const LtiSystem sys = testutil::random_system(rng, 3, 2, 2, false);
    const SynthesisResult cr = synth_cr(sys);
    const DisturbanceSpec still = DisturbanceSpec::sine(0.5, 0.0, 300);
    SimExtras extras;
    extras.burn_in = 0;
    const SimResult res = simulate(sys, cr.controller, still, 2, 1, extras);
    CHECK(res.mean == 0.0);
    for (double v : res.running_avg[0]) CHECK(v == 0.0);
}

TEST_CASE("state reconstruction equals the direct disturbance feed") {
    Rng rng(602);
    const LtiSystem sys = testutil::random_system(rng, 3, 2, 2, false); // stable plant
    const SynthesisResult cr = synth_cr(sys);
    ControllerRealization transfer_only =
        ControllerRealization::from_transfer(cr.controller.Ak, cr.controller.Bk,
                                             cr.controller.Ck);
    const DisturbanceSpec dist = DisturbanceSpec::gaussian(3, 500);
    SimExtras extras;
    extras.record_trajectories = true;
    const SimResult via_state = simulate(sys, cr.controller, dist, 1, 3, extras);
    const SimResult via_w = simulate(sys, transfer_only, dist, 1, 3, extras);
    double worst = 0.0;
    for (std::size_t t = 0; t < via_state.u_traj.size(); ++t)
        worst = std::max(worst, (via_state.u_traj[t] - via_w.u_traj[t]).norm());
    CHECK(worst < 1e-12);
}

TEST_CASE("unstable loops and non-finite states are refused") {
    Rng rng(603);
    LtiSystem sys = testutil::random_system(rng, 2, 1, 2, false);
    sys.A *= 3.0 / spectral_radius(sys.A);
    const ControllerRealization donothing = ControllerRealization::from_feedback(
        sys, Matrix::Zero(0, 0), Matrix::Zero(0, 2), Matrix::Zero(1, 0), Matrix::Zero(1, 2));
    CHECK_THROWS_AS(
        simulate(sys, donothing, DisturbanceSpec::gaussian(1, 50), 1, 1),
        UnstableLoop);
}

TEST_CASE("white-noise average cost approaches the frobenius metric") {
    Rng rng(604);
    const LtiSystem sys = testutil::random_system(rng, 3, 2, 2, false);
    const SynthesisResult h2 = synth_h2(sys);
    const double target = metric_frobenius(sys, h2.controller, default_grid(1024));
    const SimResult res =
        simulate(sys, h2.controller, DisturbanceSpec::gaussian(7, 40000), 8, 7);
    CHECK(res.mean == doctest::Approx(target).epsilon(0.05));
    CHECK(res.stderr_mean < 0.2 * res.mean);
}

TEST_CASE("sinusoid average cost matches the directional frequency value") {
    Rng rng(605);
    const LtiSystem sys = testutil::random_system(rng, 3, 2, 2, false);
    const SynthesisResult cr = synth_cr(sys);
    const double w0 = 0.9;
    const DisturbanceSpec dist = DisturbanceSpec::sine(w0, 1.0, 60000);
    const SimResult res = simulate(sys, cr.controller, dist, 1, 1);
    const ComplexMatrix T = transfer_TK(sys, cr.controller, w0);
    const Eigen::VectorXcd dir = Eigen::VectorXcd::Ones(2);
    const double expect = 0.5 * (T * dir).squaredNorm();
    CHECK(res.mean == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("CSV emission for runs and summaries") {
    Rng rng(606);
    const LtiSystem sys = testutil::random_system(rng, 2, 1, 2, false);
    const SynthesisResult h2 = synth_h2(sys);
    const SimResult res = simulate(sys, h2.controller, DisturbanceSpec::gaussian(1, 5), 2, 1);
    const std::string path = "/tmp/compet_test_sim.csv";
    write_sim_csv(res, path);
    {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,trial,cost_avg");
        int rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 10);
    }
    write_summary_csv({{"h2", "gaussian", res.mean, res.stderr_mean, res.steps, res.trials}},
                      path);
    {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "controller,disturbance,mean,stderr,T,trials");
    }
    std::remove(path.c_str());
}
