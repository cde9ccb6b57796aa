#include "gladformer/spectral.hpp"

#include <cmath>
#include <string>

#include "gladformer/errors.hpp"

namespace gladformer::spectral {

Eigen::MatrixXd adjacency(const data::Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto [u, v] : g.edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

Eigen::VectorXd degree_vector(const data::Graph& g) {
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(g.n);
    for (auto [u, v] : g.edges) {
        deg(u) += 1.0;
        deg(v) += 1.0;
    }
    return deg;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::VectorXd dinv(n);
    for (Eigen::Index i = 0; i < n; ++i) dinv(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
    Eigen::MatrixXd l = -(dinv.asDiagonal() * a * dinv.asDiagonal());
    l.diagonal().array() += 1.0;  // isolated nodes end up as identity rows
    return l;
}

Eigen::MatrixXd normalized_laplacian(const data::Graph& g) {
    return normalized_laplacian(adjacency(g));
}

EigenDecomposition eigendecompose(const Eigen::MatrixXd& laplacian, int cap) {
    if (laplacian.rows() != laplacian.cols())
        throw ShapeError("eigendecompose: matrix is " + std::to_string(laplacian.rows()) + "x" +
                         std::to_string(laplacian.cols()));
    if (laplacian.rows() > cap)
        throw OracleCapError("eigendecompose: n=" + std::to_string(laplacian.rows()) +
                             " exceeds oracle cap " + std::to_string(cap));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd rayleigh_vector(const Eigen::MatrixXd& x, const Eigen::MatrixXd& laplacian) {
    if (x.rows() != laplacian.rows())
        throw ShapeError("rayleigh_vector: x has " + std::to_string(x.rows()) + " rows, L is " +
                         std::to_string(laplacian.rows()) + "x" + std::to_string(laplacian.cols()));
    Eigen::VectorXd r(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double denom = x.col(j).squaredNorm();
        if (denom == 0.0) {
            r(j) = 0.0;
            continue;
        }
        const double num = x.col(j).dot(laplacian * x.col(j));
        r(j) = std::clamp(num / denom, 0.0, 2.0);
    }
    return r;
}

std::vector<Eigen::MatrixXd> rrwp_from_adjacency(const Eigen::MatrixXd& a, int T) {
    if (T < 1) throw ArgError("rrwp: T must be >= 1");
    const auto n = a.rows();
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd deg = a.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (deg(i) > 0.0)
            r.row(i) = a.row(i) / deg(i);
        else
            r(i, i) = 1.0;  // isolated node walks to itself
    }
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(T));
    out.push_back(Eigen::MatrixXd::Identity(n, n));
    for (int t = 1; t < T; ++t) out.push_back(out.back() * r);
    return out;
}

std::vector<Eigen::MatrixXd> rrwp(const data::Graph& g, int T) {
    return rrwp_from_adjacency(adjacency(g), T);
}

double beta_filter_response(int alpha, int beta, double lambda) {
    const double w = lambda / 2.0;
    return std::pow(w, alpha) * std::pow(1.0 - w, beta) /
           (2.0 * std::beta(alpha + 1.0, beta + 1.0));
}

Eigen::MatrixXd beta_filter_apply(const Eigen::MatrixXd& laplacian, int alpha, int beta,
                                  const Eigen::MatrixXd& x) {
    if (alpha < 0 || beta < 0) throw ArgError("beta_filter_apply: negative exponent");
    if (laplacian.rows() != x.rows())
        throw ShapeError("beta_filter_apply: L is " + std::to_string(laplacian.rows()) + "x" +
                         std::to_string(laplacian.cols()) + ", x has " + std::to_string(x.rows()) +
                         " rows");
    Eigen::MatrixXd y = x;
    for (int i = 0; i < alpha; ++i) y = 0.5 * (laplacian * y);
    for (int i = 0; i < beta; ++i) y = y - 0.5 * (laplacian * y);
    return y / (2.0 * std::beta(alpha + 1.0, beta + 1.0));
}

std::vector<Eigen::MatrixXd> beta_bank(const Eigen::MatrixXd& laplacian, int M,
                                       const Eigen::MatrixXd& x) {
    if (M < 1) throw ArgError("beta_bank: M must be >= 1");
    std::vector<Eigen::MatrixXd> bank;
    bank.reserve(static_cast<std::size_t>(M) + 1);
    for (int m = 0; m <= M; ++m) bank.push_back(beta_filter_apply(laplacian, m, M - m, x));
    return bank;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> low_high_apply(const Eigen::MatrixXd& laplacian,
                                                           double psi,
                                                           const Eigen::MatrixXd& x) {
    if (laplacian.rows() != x.rows())
        throw ShapeError("low_high_apply: L is " + std::to_string(laplacian.rows()) + "x" +
                         std::to_string(laplacian.cols()) + ", x has " + std::to_string(x.rows()) +
                         " rows");
    Eigen::MatrixXd lx = laplacian * x;
    return {(psi + 1.0) * x - lx, (psi - 1.0) * x + lx};
}

SpectrumReport spectrum_report(const data::Graph& g, const Eigen::MatrixXd& x, int cap) {
    auto eig = eigendecompose(normalized_laplacian(g), cap);
    Eigen::MatrixXd xt = eig.eigenvectors.transpose() * x;  // graph Fourier coefficients
    Eigen::VectorXd energy = xt.array().square().rowwise().mean();
    const double total = energy.sum();
    if (total > 0.0) energy /= total;
    return {std::move(eig.eigenvalues), std::move(energy)};
}

SpectralCache build_spectral_cache(const data::Graph& g, int T) {
    SpectralCache c;
    c.laplacian = normalized_laplacian(g);
    c.degrees = degree_vector(g);
    c.rrwp = rrwp(g, T);
    c.rayleigh = rayleigh_vector(g.x, c.laplacian);
    return c;
}

}  // namespace gladformer::spectral
