#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "epec/election.hpp"
#include "epec/error.hpp"

namespace epec {

// Antagonism decomposition of one election.
//
// Within-antagonism of candidate i is the vote-weighted mean absolute
// deviation of her unit shares from her overall share, scaled by 1/(N-1):
//
//     within_i = sum_k votes_ik * |share_ik - overall_i|
//                -----------------------------------------
//                        (N - 1) * sum_k votes_ik
//
// Between-antagonism measures her closeness to every other candidate:
//
//     between_i = sum_{j != i} sum_k votes_ik * (1 - |share_ik - share_jk|)
//                 -----------------------------------------------------------
//                              N * (N - 1) * sum_k votes_ik
//
// Between-antagonism always lies in [0, 1/N]; within-antagonism spans
// [0, 1/N] on constant-unit-size data (heavily unbalanced unit weights can
// push it up to 1/(N-1)). Election polarization (EP) sums the within terms,
// election competitiveness (EC) the between terms; each lies in [0, 1].
// The self term j == i is excluded from the between sum: including it would
// push a perfectly tied election past the 1/N per-candidate bound.
//
// Candidates with zero total votes get antagonism 0 by convention (a 0/0
// case) and are flagged in the report.

struct CandidateAntagonism {
    std::string candidate;
    double within_a = 0.0;
    double between_a = 0.0;
    double total_a = 0.0;
    bool zero_votes = false;
};

struct AntagonismReport {
    std::vector<CandidateAntagonism> per_candidate;
    double ep = 0.0;
    double ec = 0.0;
    int n_candidates = 0;
    int n_units = 0;

    bool has_zero_vote_candidate() const {
        for (const CandidateAntagonism& c : per_candidate)
            if (c.zero_votes) return true;
        return false;
    }
};

inline double within_antagonism(const ElectionMatrix& m, int i) {
    const double total_i = m.candidate_total(i);
    if (total_i <= 0.0) return 0.0;
    const double overall = m.overall_share(i);
    double acc = 0.0;
    for (int k = 0; k < m.n_units(); ++k)
        acc += m.votes(i, k) * std::fabs(m.share(i, k) - overall);
    return acc / ((m.n_candidates() - 1) * total_i);
}

inline double between_antagonism(const ElectionMatrix& m, int i) {
    const double total_i = m.candidate_total(i);
    if (total_i <= 0.0) return 0.0;
    const int n = m.n_candidates();
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        for (int k = 0; k < m.n_units(); ++k)
            acc += m.votes(i, k) * (1.0 - std::fabs(m.share(i, k) - m.share(j, k)));
    }
    return acc / (static_cast<double>(n) * (n - 1) * total_i);
}

inline AntagonismReport polarization_report(const ElectionMatrix& m) {
    AntagonismReport report;
    report.n_candidates = m.n_candidates();
    report.n_units = m.n_units();
    report.per_candidate.reserve(m.n_candidates());
    for (int i = 0; i < m.n_candidates(); ++i) {
        CandidateAntagonism c;
        c.candidate = m.candidates()[i];
        c.zero_votes = m.candidate_total(i) <= 0.0;
        c.within_a = within_antagonism(m, i);
        c.between_a = between_antagonism(m, i);
        c.total_a = c.within_a + c.between_a;
        report.ep += c.within_a;
        report.ec += c.between_a;
        report.per_candidate.push_back(std::move(c));
    }
    return report;
}

// Esteban-Ray polarization adapted to per-candidate vote distributions:
//
//     ER_i = K * sum_k sum_j votes_ik^(1+alpha) * votes_jk * |share_ik - share_jk|
//
// with K = 1 / (sum_k votes_ik)^(2+alpha). The K normalization cancels any
// uniform rescaling of vote counts. Zero-vote candidates score 0.
struct EstebanRayParams {
    double alpha = 1.0;
};

struct EstebanRayResult {
    double alpha = 0.0;
    std::vector<double> per_candidate;
    double aggregate = 0.0; // EP' = sum_i ER_i
};

inline EstebanRayResult esteban_ray(const ElectionMatrix& m, const EstebanRayParams& params) {
    if (!(params.alpha > 0.0)) fail(errc::invalid_spec, "esteban-ray alpha must be > 0");
    EstebanRayResult result;
    result.alpha = params.alpha;
    const int n = m.n_candidates();
    result.per_candidate.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double total_i = m.candidate_total(i);
        if (total_i <= 0.0) continue;
        double acc = 0.0;
        for (int k = 0; k < m.n_units(); ++k) {
            const double vi = std::pow(m.votes(i, k), 1.0 + params.alpha);
            if (vi == 0.0) continue;
            for (int j = 0; j < n; ++j)
                acc += vi * m.votes(j, k) * std::fabs(m.share(i, k) - m.share(j, k));
        }
        result.per_candidate[i] = acc / std::pow(total_i, 2.0 + params.alpha);
        result.aggregate += result.per_candidate[i];
    }
    return result;
}

// Sample standard deviation of candidate i's unit shares around her overall
// (vote-weighted) share. Zero-total units are excluded from the sum and from
// the unit count.
inline double dispersion(const ElectionMatrix& m, int i) {
    const double mu = m.overall_share(i);
    double acc = 0.0;
    long count = 0;
    for (int k = 0; k < m.n_units(); ++k) {
        if (m.unit_total(k) <= 0.0) continue;
        const double d = m.share(i, k) - mu;
        acc += d * d;
        ++count;
    }
    if (count < 2)
        fail(errc::single_unit, "dispersion needs at least 2 units with votes");
    return std::sqrt(acc / (count - 1));
}

// Distance between the two leading candidates' national shares.
inline double margin_of_victory(const ElectionMatrix& m) {
    std::vector<double> shares(m.candidates().size());
    for (int i = 0; i < m.n_candidates(); ++i) shares[i] = m.overall_share(i);
    std::sort(shares.begin(), shares.end(), std::greater<>());
    return shares[0] - shares[1];
}

// Reynal-Querol polarization over national shares:
//     RQ = 1 - sum_i ((1/2 - s_i) / (1/2))^2 * s_i
inline double reynal_querol(const ElectionMatrix& m) {
    double acc = 0.0;
    for (int i = 0; i < m.n_candidates(); ++i) {
        const double s = m.overall_share(i);
        const double d = (0.5 - s) / 0.5;
        acc += d * d * s;
    }
    return 1.0 - acc;
}

// Laakso-Taagepera effective number of candidates: 1 / sum_i s_i^2.
inline double effective_number_of_candidates(const ElectionMatrix& m) {
    double acc = 0.0;
    for (int i = 0; i < m.n_candidates(); ++i) {
        const double s = m.overall_share(i);
        acc += s * s;
    }
    return 1.0 / acc;
}

inline constexpr double kDefaultAlphas[] = {0.25, 1.0};

// Bundle of the classical comparison measures for one election. Dispersion
// is omitted (empty, NaN aggregate) when fewer than two units carry votes.
struct ComparisonReport {
    std::vector<EstebanRayResult> esteban_ray;
    std::vector<double> dispersion_per_candidate;
    double dispersion_aggregate = std::numeric_limits<double>::quiet_NaN();
    double margin_of_victory = 0.0;
    double reynal_querol = 0.0;
    double effective_number_of_candidates = 0.0;
};

inline ComparisonReport comparison_report(const ElectionMatrix& m,
                                          std::span<const double> alphas = kDefaultAlphas) {
    ComparisonReport report;
    for (double alpha : alphas) report.esteban_ray.push_back(esteban_ray(m, {alpha}));
    int units_with_votes = 0;
    for (int k = 0; k < m.n_units(); ++k)
        if (m.unit_total(k) > 0.0) ++units_with_votes;
    if (units_with_votes >= 2) {
        report.dispersion_aggregate = 0.0;
        for (int i = 0; i < m.n_candidates(); ++i) {
            report.dispersion_per_candidate.push_back(dispersion(m, i));
            report.dispersion_aggregate += report.dispersion_per_candidate.back();
        }
    }
    report.margin_of_victory = margin_of_victory(m);
    report.reynal_querol = reynal_querol(m);
    report.effective_number_of_candidates = effective_number_of_candidates(m);
    return report;
}

} // namespace epec
