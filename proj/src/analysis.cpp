#include "nlgcl/analysis.hpp"

#include "nlgcl/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

namespace nlgcl {

Matrix dense_adjacency(const NormalizedAdjacency& adj) {
    const Index nu = adj.num_users();
    const Index n = nu + adj.num_items();
    Matrix dense = Matrix::Zero(n, n);
    const auto& csr = adj.structure.user_to_items;
    for (Index u = 0; u < nu; ++u) {
        for (std::size_t k = csr.offsets[static_cast<std::size_t>(u)]; k < csr.offsets[static_cast<std::size_t>(u) + 1];
             ++k) {
            const Index i = nu + csr.cols[k];
            dense(u, i) = adj.user_to_items_w[k];
            dense(i, u) = adj.user_to_items_w[k];
        }
    }
    return dense;
}

SpectrumReport eigendecompose(const NormalizedAdjacency& adj, const SpectrumOptions& options) {
    const Index n = adj.num_users() + adj.num_items();
    if (n > options.max_nodes) {
        throw ConfigError("graph has " + std::to_string(n) + " nodes, above the densification cap of " +
                          std::to_string(options.max_nodes));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_adjacency(adj), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigensolver did not converge");
    }
    SpectrumReport report;
    const auto& values = solver.eigenvalues();
    report.eigenvalues.assign(values.data(), values.data() + values.size());
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), std::greater<>());
    for (double lambda : report.eigenvalues) {
        const double mag = std::abs(lambda);
        report.lambda_max = std::max(report.lambda_max, mag);
        if (mag < 1.0 - options.eps_gap) {
            report.lambda_sub = std::max(report.lambda_sub, mag);
        }
        if (mag < options.eps_zero) {
            ++report.num_zero;
        }
    }
    return report;
}

DecayCurves decay_curves(const SpectrumReport& spectrum, Index num_layers, double eps_zero) {
    if (num_layers < 1) {
        throw ConfigError("decay curves need at least one layer");
    }
    double log_det = 0.0;  // sum of ln|lambda| over the nonzero spectrum
    for (double lambda : spectrum.eigenvalues) {
        if (std::abs(lambda) >= eps_zero) {
            log_det += std::log(std::abs(lambda));
        }
    }
    DecayCurves curves;
    for (Index l = 0; l <= num_layers; ++l) {
        const auto layer = static_cast<double>(l);
        curves.entropy_proxy.push_back(layer * log_det);
        curves.literal_mi.push_back(l == 0 ? 0.0 : -log_det);
        curves.snr_decay.push_back(l == 0 ? 0.0 : std::pow(spectrum.lambda_sub, 2.0 * layer));
    }
    return curves;
}

ComplexityEstimate estimate_complexity(const ComplexityInputs& in) {
    ComplexityEstimate est;
    est.encoder_ops = 2 * in.num_edges * in.num_layers * in.dim;
    est.bpr_ops = 2 * in.batch_nodes * in.dim;
    est.cl_ops_hetero = in.groups * in.batch_nodes * in.batch_nodes * in.dim;
    est.cl_ops_entire = 2 * est.cl_ops_hetero;
    est.total_hetero = est.encoder_ops + est.bpr_ops + est.cl_ops_hetero;
    est.total_entire = est.encoder_ops + est.bpr_ops + est.cl_ops_entire;
    return est;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_spectrum_csv(const SpectrumReport& spectrum, const std::filesystem::path& path,
                        const ArtifactStamp& stamp) {
    auto out = open_csv(path, stamp);
    out << "# lambda_max=" << fmt(spectrum.lambda_max) << " lambda_sub=" << fmt(spectrum.lambda_sub)
        << " num_zero=" << spectrum.num_zero << '\n';
    out << "k,eigenvalue\n";
    for (std::size_t k = 0; k < spectrum.eigenvalues.size(); ++k) {
        out << k << ',' << fmt(spectrum.eigenvalues[k]) << '\n';
    }
}

void write_curves_csv(const DecayCurves& curves, const std::filesystem::path& path, const ArtifactStamp& stamp) {
    auto out = open_csv(path, stamp);
    out << "l,entropy_proxy,literal_mi,snr_decay\n";
    for (std::size_t l = 0; l < curves.entropy_proxy.size(); ++l) {
        out << l << ',' << fmt(curves.entropy_proxy[l]) << ',';
        if (l == 0) {
            out << ',';  // undefined at the base layer
        } else {
            out << fmt(curves.literal_mi[l]) << ',' << fmt(curves.snr_decay[l]);
        }
        out << '\n';
    }
}

}  // namespace nlgcl
