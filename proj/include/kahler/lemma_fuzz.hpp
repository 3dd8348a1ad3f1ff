#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kahler/hermitian_algebra.hpp"

namespace kahler {

/// Random symmetric 2n x 2n matrix with entries uniform in [-5, 5]. When
/// shifted, the diagonal is moved so that lambda_min lands uniformly in
/// [-1, 1]; half of such samples are positive definite.
Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, bool shifted);

/// Random valid (A, B) with A positive definite.
WirtingerHessian<double> random_wirtinger_pd(std::mt19937_64& rng, int n);

struct LemmaFuzzStats {
    int n = 0;
    std::size_t samples = 0;
    std::size_t undetermined = 0;    // some |eigenvalue| of H, A or M within the margin
    std::size_t positive_definite = 0;
    std::size_t agreements = 0;
    std::size_t disagreements = 0;
    std::size_t q_disagreements = 0;
    std::size_t congruence_checked = 0;  // samples with A invertible and cond(A) < 1e6
    double max_q_residual = 0.0;         // |4Q - P_L H P_R|
    double max_congruence_residual = 0.0;
    double max_round_trip = 0.0;
    double max_m_hermitian_defect = 0.0;
    std::vector<Eigen::MatrixXd> disagreeing;  // full H of each disagreement
};

struct LemmaFuzzOptions {
    double margin = 1e-6;
    double max_condition = 1e6;
};

LemmaFuzzStats fuzz_lemma(int n, std::size_t count, std::uint64_t seed, const LemmaFuzzOptions& options = {});

/// Deterministic plain-text summary.
std::string format_summary(const std::vector<LemmaFuzzStats>& stats, std::uint64_t seed);

}  // namespace kahler
