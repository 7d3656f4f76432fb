#include "fixtures.hpp"
#include "oracles.hpp"

#include "nlgcl/analysis.hpp"
#include "nlgcl/error.hpp"
#include "nlgcl/graph.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace nlgcl;

TEST_CASE("three-edge fixture spectrum and entropy slope") {
    const auto adj = normalize(build_graph(2, 2, fixture::three_edges()));
    const auto spectrum = eigendecompose(adj);
    REQUIRE(spectrum.eigenvalues.size() == 4);
    const std::vector<double> want{1.0, 0.5, -0.5, -1.0};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(spectrum.eigenvalues[k] - want[k]) <= 1e-9);
    }
    CHECK(std::abs(spectrum.lambda_max - 1.0) <= 1e-9);
    CHECK(std::abs(spectrum.lambda_sub - 0.5) <= 1e-9);
    CHECK(spectrum.num_zero == 0);

    const auto curves = decay_curves(spectrum, 4);
    REQUIRE(curves.entropy_proxy.size() == 5);
    for (std::size_t l = 0; l < 5; ++l) {
        CHECK(std::abs(curves.entropy_proxy[l] + static_cast<double>(l) * std::log(4.0)) <= 1e-9);
    }
    CHECK(curves.literal_mi[0] == 0.0);
    for (std::size_t l = 1; l < 5; ++l) {
        CHECK(std::abs(curves.literal_mi[l] - std::log(4.0)) <= 1e-9);
        CHECK(std::abs(curves.snr_decay[l] - std::pow(0.25, static_cast<double>(l))) <= 1e-12);
    }
}

TEST_CASE("single edges are lossless") {
    const auto one = eigendecompose(normalize(build_graph(1, 1, {{0, 0}})));
    REQUIRE(one.eigenvalues.size() == 2);
    CHECK(std::abs(one.eigenvalues[0] - 1.0) <= 1e-12);
    CHECK(std::abs(one.eigenvalues[1] + 1.0) <= 1e-12);

    const auto disjoint = eigendecompose(normalize(build_graph(3, 3, {{0, 0}, {1, 1}, {2, 2}})));
    for (double v : decay_curves(disjoint, 4).entropy_proxy) {
        CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("connected graphs: lambda_max = 1, spectrum in [-1, 1], entropy non-increasing") {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng = substream(trial, "spectrum-test");
        std::uniform_int_distribution<Index> side(2, 40);
        const Index nu = side(rng);
        const Index ni = side(rng);
        const auto edges = oracle::random_connected_bipartite(rng, nu, ni, 0.1);
        const auto adj = normalize(build_graph(nu, ni, edges));
        const auto spectrum = eigendecompose(adj);
        CHECK(std::abs(spectrum.lambda_max - 1.0) <= 1e-9);
        for (double v : spectrum.eigenvalues) {
            CHECK(std::abs(v) <= 1.0 + 1e-9);
        }
        // Eigenvalues agree with an independent eigensolve of the oracle matrix.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(oracle::dense_normalized(nu, ni, edges));
        std::vector<double> want(solver.eigenvalues().data(), solver.eigenvalues().data() + nu + ni);
        std::sort(want.rbegin(), want.rend());
        for (std::size_t k = 0; k < want.size(); ++k) {
            CHECK(std::abs(spectrum.eigenvalues[k] - want[k]) <= 1e-9);
        }
        const auto curves = decay_curves(spectrum, 4);
        for (std::size_t l = 1; l < curves.entropy_proxy.size(); ++l) {
            CHECK(curves.entropy_proxy[l] <= curves.entropy_proxy[l - 1]);
        }
    }
}

TEST_CASE("densification cap") {
    const auto adj = normalize(build_graph(2, 2, fixture::three_edges()));
    SpectrumOptions small;
    small.max_nodes = 3;
    try {
        eigendecompose(adj, small);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("densification cap") != std::string::npos);
    }
}

TEST_CASE("complexity estimator") {
    ComplexityInputs in;
    in.num_edges = 1000;
    in.num_layers = 2;
    in.dim = 64;
    in.batch_nodes = 512;
    in.groups = 1;
    const auto one = estimate_complexity(in);
    CHECK(one.encoder_ops == 256000);
    CHECK(one.bpr_ops == 2 * 512 * 64);
    CHECK(one.cl_ops_entire == 2 * one.cl_ops_hetero);
    in.groups = 2;
    const auto two = estimate_complexity(in);
    CHECK(two.cl_ops_hetero == 2 * one.cl_ops_hetero);
    CHECK(two.cl_ops_entire == 2 * one.cl_ops_entire);
    CHECK(one.total_hetero == one.encoder_ops + one.bpr_ops + one.cl_ops_hetero);
}

TEST_CASE("csv outputs carry the stamp") {
    const auto adj = normalize(build_graph(2, 2, fixture::three_edges()));
    const auto spectrum = eigendecompose(adj);
    const auto dir = fixture::scratch("analysis");
    write_spectrum_csv(spectrum, dir / "s.csv", {0x77, 1, kVersion});
    write_curves_csv(decay_curves(spectrum, 2), dir / "c.csv", {0x77, 1, kVersion});
    const auto curves = fixture::read_file(dir / "c.csv");
    CHECK(curves.rfind("# nlgcl-0.1.0 config_hash=0000000000000077 seed=1\n", 0) == 0);
    CHECK(curves.find("l,entropy_proxy,literal_mi,snr_decay\n") != std::string::npos);
    CHECK(fixture::read_file(dir / "s.csv").rfind("# nlgcl-0.1.0", 0) == 0);
}
