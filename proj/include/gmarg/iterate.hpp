#pragma once

#include <random>

#include "gmarg/statesearch.hpp"

// The see-saw loop: alternate the witness SDP (fixed state) with the state
// SDP (fixed witness), starting from a random pure seed. A round whose state
// step goes below the success threshold yields a certified example -- a state
// whose constrained marginals are PPT while the pattern-supported witness is
// negative on them.

namespace gmarg {

struct SearchConfig {
    QuditRegister reg;
    MarginalPattern pattern;
    ConstraintSet constraints;
    std::uint64_t seed = 1;
    int max_rounds = 50;
    double stall_tol = 1e-6;
    double success_threshold = kDetectionThreshold;
    int polish_rounds = 10;  // extra rounds after the first success
    conic::SolveOptions solve;

    static SearchConfig all_pairs(const QuditRegister& reg, std::uint64_t seed) {
        return {reg, MarginalPattern::all_pairs(reg), ConstraintSet::all_pairs(reg), seed};
    }
};

enum class SearchStatus { success, stalled, infeasible, solver_failure };

inline std::string search_status_name(SearchStatus s) {
    switch (s) {
        case SearchStatus::success: return "success";
        case SearchStatus::stalled: return "stalled";
        case SearchStatus::infeasible: return "infeasible";
        default: return "solver-failure";
    }
}

struct RoundRecord {
    double step1_value = std::numeric_limits<double>::quiet_NaN();
    double step2_value = std::numeric_limits<double>::quiet_NaN();
};

struct SearchOutcome {
    SearchStatus status = SearchStatus::solver_failure;
    std::optional<DensityOperator> state;
    std::optional<Witness> witness;
    double value = std::numeric_limits<double>::quiet_NaN();  // tr(W rho) of the certified pair
    std::vector<RoundRecord> history;
    int rounds_to_success = -1;
    std::optional<WitnessValidation> validation;  // re-verified on success
    double worst_pair_pt = std::numeric_limits<double>::quiet_NaN();
    std::string notes;
};

// Rank-1 projector onto a Haar-random pure state; deterministic per seed.
inline DensityOperator random_pure_seed(const QuditRegister& reg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vec v(reg.total_dim());
    for (int i = 0; i < reg.total_dim(); ++i) v[i] = cxd(g(rng), g(rng));
    v /= v.norm();
    return PureState(reg, v).to_density();
}

inline SearchOutcome run_seesaw(const SearchConfig& cfg) {
    SearchOutcome out;
    DensityOperator rho = random_pure_seed(cfg.reg, cfg.seed);

    bool succeeded = false;
    int polish_left = cfg.polish_rounds;
    double prev_step2 = std::numeric_limits<double>::quiet_NaN();
    double best_value = std::numeric_limits<double>::infinity();

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        auto step1 = min_witness_value(rho, cfg.pattern, cfg.solve);
        if (step1.status != conic::Status::optimal) {
            out.status = SearchStatus::solver_failure;
            out.notes = "witness step failed in round " + std::to_string(round) + ": " +
                        step1.solution.message;
            return out;
        }
        auto step2 = min_state_for_witness(step1.witness->op, cfg.constraints, cfg.solve);
        if (step2.status == conic::Status::infeasible) {
            out.status = SearchStatus::infeasible;
            out.notes = step2.notes;
            return out;
        }
        if (step2.status != conic::Status::optimal) {
            out.status = SearchStatus::solver_failure;
            out.notes = "state step failed in round " + std::to_string(round) + ": " +
                        step2.solution.message;
            return out;
        }
        out.history.push_back({step1.value, step2.value});

        if (step2.value < cfg.success_threshold) {
            if (!succeeded) out.rounds_to_success = round;
            succeeded = true;
            if (step2.value < best_value) {
                best_value = step2.value;
                out.state = step2.state;
                out.witness = step1.witness;
                out.value = step2.value;
            }
            if (--polish_left < 0) break;
        } else if (succeeded) {
            break;  // negativity lost, keep the best certified pair
        } else if (round >= 2 && std::abs(step2.value - prev_step2) < cfg.stall_tol) {
            out.status = SearchStatus::stalled;
            out.notes = "no improvement before any negativity";
            return out;
        }
        prev_step2 = step2.value;
        rho = *step2.state;
    }

    if (!succeeded) {
        out.status = SearchStatus::stalled;
        out.notes = "max rounds reached without success";
        return out;
    }

    out.status = SearchStatus::success;
    out.validation = validate_witness(*out.witness);
    out.worst_pair_pt = std::numeric_limits<double>::infinity();
    for (auto [a, b] : cfg.constraints.two_body_ppt) {
        auto red = partial_trace(*out.state, PartySet{a, b});
        out.worst_pair_pt = std::min(out.worst_pair_pt,
                                     min_eigenvalue(partial_transpose(red, {0})));
    }
    return out;
}

}  // namespace gmarg
