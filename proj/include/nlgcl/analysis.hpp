#pragma once

#include "nlgcl/artifact.hpp"
#include "nlgcl/graph.hpp"
#include "nlgcl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace nlgcl {

struct SpectrumOptions {
    Index max_nodes = 2000;
    double eps_zero = 1e-10;
    double eps_gap = 1e-6;
};

struct SpectrumReport {
    std::vector<double> eigenvalues;  // descending
    double lambda_max = 0.0;          // largest |lambda|
    double lambda_sub = 0.0;          // largest |lambda| below 1 - eps_gap
    Index num_zero = 0;               // |lambda| < eps_zero
};

/// Dense (|U|+|I|)^2 normalized adjacency, users first.
Matrix dense_adjacency(const NormalizedAdjacency& adj);

/// Full symmetric eigendecomposition of the dense normalized adjacency.
/// Throws ConfigError when the graph exceeds options.max_nodes.
SpectrumReport eigendecompose(const NormalizedAdjacency& adj, const SpectrumOptions& options = {});

/// Layer-wise spectral proxies, assuming unit base covariance so that layer l
/// has covariance eigenvalues lambda_k^(2l). Index l of each vector is layer l;
/// literal_mi and snr_decay are undefined at l = 0 and hold 0 there.
struct DecayCurves {
    std::vector<double> entropy_proxy;  // l * sum_{lambda != 0} ln|lambda|
    std::vector<double> literal_mi;     // -sum_{lambda != 0} ln|lambda|, independent of l
    std::vector<double> snr_decay;      // lambda_sub^(2l)
};

DecayCurves decay_curves(const SpectrumReport& spectrum, Index num_layers, double eps_zero = 1e-10);

/// Operation counts per training batch.
struct ComplexityInputs {
    std::uint64_t num_edges = 0;
    std::uint64_t batch_nodes = 0;  // M
    std::uint64_t num_layers = 0;
    std::uint64_t dim = 0;
    std::uint64_t groups = 1;
};

struct ComplexityEstimate {
    std::uint64_t encoder_ops = 0;     // 2 |E| L d
    std::uint64_t bpr_ops = 0;         // 2 M d
    std::uint64_t cl_ops_hetero = 0;   // G * M anchors * M candidates * d
    std::uint64_t cl_ops_entire = 0;   // twice the heterogeneous candidates
    std::uint64_t total_hetero = 0;
    std::uint64_t total_entire = 0;
};

ComplexityEstimate estimate_complexity(const ComplexityInputs& in);

void write_spectrum_csv(const SpectrumReport& spectrum, const std::filesystem::path& path, const ArtifactStamp& stamp);
void write_curves_csv(const DecayCurves& curves, const std::filesystem::path& path, const ArtifactStamp& stamp);

}  // namespace nlgcl
