#include "kahler/lemma_fuzz.hpp"

#include <iomanip>
#include <sstream>

namespace kahler {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, bool shifted) {
    std::uniform_real_distribution<double> entry(-5.0, 5.0);
    const int d = 2 * n;
    Eigen::MatrixXd h(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i) h(i, j) = h(j, i) = entry(rng);
    if (shifted) {
        std::uniform_real_distribution<double> target(-1.0, 1.0);
        h.diagonal().array() += target(rng) - min_eigenvalue(h);
    }
    return h;
}

WirtingerHessian<double> random_wirtinger_pd(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    ComplexMatrix<double> g(n, n), b(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = {entry(rng), entry(rng)};
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) b(i, j) = b(j, i) = std::complex<double>(entry(rng), entry(rng));
    ComplexMatrix<double> a = g * g.adjoint() + 0.1 * ComplexMatrix<double>::Identity(n, n);
    a = (a + a.adjoint().eval()) / 2.0;
    return WirtingerHessian<double>(std::move(a), std::move(b));
}

LemmaFuzzStats fuzz_lemma(int n, std::size_t count, std::uint64_t seed, const LemmaFuzzOptions& options) {
    LemmaFuzzStats st;
    st.n = n;
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
    for (std::size_t s = 0; s < count; ++s) {
        const Eigen::MatrixXd full = random_symmetric(rng, n, s % 2 == 1);
        const auto h = RealHessian<double>::from_full(full);
        const auto ab = real_to_wirtinger(h);
        ++st.samples;

        const auto back = wirtinger_to_real(ab);
        st.max_round_trip = std::max(st.max_round_trip, max_abs(back.full() - full));
        const auto again = real_to_wirtinger(back);
        st.max_round_trip = std::max({st.max_round_trip, max_abs(again.A - ab.A), max_abs(again.B - ab.B)});

        const auto q = assemble_Q(ab);
        const ComplexMatrix<double> phr =
            left_factor<double>(n) * full.cast<std::complex<double>>() * right_factor<double>(n);
        st.max_q_residual = std::max(st.max_q_residual, max_abs(4.0 * q.Q - phr));

        const Eigen::VectorXd eig_h = eigenvalues(full);
        const Eigen::VectorXd eig_a = eigenvalues(ab.A);
        const double min_abs_a = eig_a.cwiseAbs().minCoeff();
        bool in_margin = eig_h.cwiseAbs().minCoeff() <= options.margin || min_abs_a <= options.margin;
        if (min_abs_a > default_tolerance(ab.A)) {
            const auto m = schur_complement_M(ab);
            st.max_m_hermitian_defect = std::max(st.max_m_hermitian_defect, hermitian_defect(m));
            in_margin = in_margin || eigenvalues(m).cwiseAbs().minCoeff() <= options.margin;
            if (eig_a.cwiseAbs().maxCoeff() / min_abs_a < options.max_condition) {
                ++st.congruence_checked;
                st.max_congruence_residual = std::max(st.max_congruence_residual, congruence_factorization_check(ab));
            }
        }
        if (in_margin) {
            ++st.undetermined;
            continue;
        }

        const auto triple = convexity_triple(h);
        st.positive_definite += triple.h.is_positive_definite;
        if (triple.agrees()) {
            ++st.agreements;
        } else {
            ++st.disagreements;
            st.disagreeing.push_back(full);
        }
        if (eigen_report(q.Q).is_positive_definite != triple.h.is_positive_definite) ++st.q_disagreements;
    }
    return st;
}

std::string format_summary(const std::vector<LemmaFuzzStats>& stats, std::uint64_t seed) {
    std::ostringstream os;
    os << "lemma fuzz seed=" << seed << "\n";
    os << std::scientific << std::setprecision(3);
    for (const auto& s : stats) {
        os << "n=" << s.n << " samples=" << s.samples << " decided=" << s.samples - s.undetermined
           << " undetermined=" << s.undetermined << " positive_definite=" << s.positive_definite
           << " agreements=" << s.agreements << " disagreements=" << s.disagreements
           << " q_disagreements=" << s.q_disagreements << "\n";
        os << "    max|4Q-P_L H P_R|=" << s.max_q_residual << " max_congruence=" << s.max_congruence_residual
           << " (checked " << s.congruence_checked << ") max_round_trip=" << s.max_round_trip
           << " max|M-M*|=" << s.max_m_hermitian_defect << "\n";
    }
    return os.str();
}

}  // namespace kahler
