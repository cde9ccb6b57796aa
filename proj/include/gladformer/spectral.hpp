#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gladformer/graph.hpp"

namespace gladformer::spectral {

inline constexpr int kDefaultOracleCap = 256;

Eigen::MatrixXd adjacency(const data::Graph& g);

Eigen::VectorXd degree_vector(const data::Graph& g);

// I - D^{-1/2} A D^{-1/2}; rows and columns of isolated nodes equal the
// corresponding identity rows, keeping every eigenvalue in [0, 2].
Eigen::MatrixXd normalized_laplacian(const data::Graph& g);
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& adjacency);

// Dense eigendecomposition L = U diag(lambda) U^T, eigenvalues ascending.
// Exists for tests and the spectrum report, never on the training path, hence
// the size cap.
struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // columns are eigenvectors
};
EigenDecomposition eigendecompose(const Eigen::MatrixXd& laplacian,
                                  int cap = kDefaultOracleCap);

// Per feature column j: (x_j^T L x_j) / (x_j^T x_j), 0 for a zero-norm column.
Eigen::VectorXd rayleigh_vector(const Eigen::MatrixXd& x, const Eigen::MatrixXd& laplacian);

// Random-walk matrix powers [I, R, R^2, ..., R^{T-1}] with the row-stochastic
// convention R = D^{-1} A; rows of isolated nodes are identity rows.
std::vector<Eigen::MatrixXd> rrwp(const data::Graph& g, int T);
std::vector<Eigen::MatrixXd> rrwp_from_adjacency(const Eigen::MatrixXd& adjacency, int T);

// Beta wavelet band-pass filter applied as a polynomial in L:
// (L/2)^alpha (I - L/2)^beta x / (2 B(alpha+1, beta+1)).
Eigen::MatrixXd beta_filter_apply(const Eigen::MatrixXd& laplacian, int alpha, int beta,
                                  const Eigen::MatrixXd& x);

// Scalar spectral response of the same filter at eigenvalue lambda.
double beta_filter_response(int alpha, int beta, double lambda);

// The wavelet transform group: element m applies the (m, M-m) filter, m = 0..M.
std::vector<Eigen::MatrixXd> beta_bank(const Eigen::MatrixXd& laplacian, int M,
                                       const Eigen::MatrixXd& x);

// Generalized low/high-pass pair: ((psi+1)I - L)x and ((psi-1)I + L)x.
// The two outputs always sum to 2*psi*x.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> low_high_apply(const Eigen::MatrixXd& laplacian,
                                                           double psi,
                                                           const Eigen::MatrixXd& x);

// Signal energy across the Laplacian spectrum, mean over feature columns,
// normalized to sum 1.
struct SpectrumReport {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::VectorXd energy;
};
SpectrumReport spectrum_report(const data::Graph& g, const Eigen::MatrixXd& x,
                               int cap = kDefaultOracleCap);

struct SpectralCache {
    Eigen::MatrixXd laplacian;
    Eigen::VectorXd degrees;
    std::vector<Eigen::MatrixXd> rrwp;
    Eigen::VectorXd rayleigh;
};
SpectralCache build_spectral_cache(const data::Graph& g, int T);

}  // namespace gladformer::spectral
