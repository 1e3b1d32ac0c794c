#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace netlineq {

/// Labels for the independent randomness streams of an experiment.
/// Problem, Space and Init are shared across Monte Carlo runs (derived with
/// run index 0); Graph and Rows are per-run streams.
enum class StreamLabel : std::uint64_t {
    Problem = 1,
    Space = 2,
    Init = 3,
    Graph = 4,
    Rows = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Stable child-seed derivation from (master seed, run index, stream label).
/// Pure integer mixing, identical on every platform.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, StreamLabel label) {
    std::uint64_t s = detail::splitmix64(master);
    s = detail::splitmix64(s ^ (run * 0x9e3779b97f4a7c15ULL));
    s = detail::splitmix64(s ^ static_cast<std::uint64_t>(label));
    return s;
}

/// Standard-normal vector drawn from the given engine.
inline Eigen::VectorXd gaussian_vector(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
    return v;
}

/// Standard-normal matrix drawn from the given engine, row by row.
inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

} // namespace netlineq
