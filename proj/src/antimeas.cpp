#include "anticert/antimeas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>

namespace anticert {

namespace {

constexpr double kZeroWeight = 1e-12;

// B-side vector left after effect vector m fires on side A of |phi>:
// w_j = sum_i conj(m_i) phi[i*d + j].  |w|^2 is the outcome probability.
std::vector<cxd> steered_vector(const std::vector<cxd>& phi, const std::vector<cxd>& m,
                                std::size_t d) {
    std::vector<cxd> w(d, cxd(0.0, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        const cxd mi = std::conj(m[i]);
        if (mi == cxd(0.0, 0.0)) continue;
        for (std::size_t j = 0; j < d; ++j) w[j] += mi * phi[i * d + j];
    }
    return w;
}

double norm_squared(const std::vector<cxd>& v) {
    double n2 = 0.0;
    for (const cxd& c : v) n2 += std::norm(c);
    return n2;
}

// sum_a min_x p_x |<m_{a|x}|v>|^2 for a raw amplitude vector, optionally
// replacing the min by softmin_tau to smooth the kinks during ascent.
double inner_sum(const MeasurementEnsemble& ensemble, const std::vector<cxd>& v,
                 double smoothing) {
    const std::size_t f = ensemble.outcomes();
    const std::size_t l = ensemble.settings();
    const std::size_t d = ensemble.dim();
    double total = 0.0;
    std::vector<double> vals(l);
    for (std::size_t a = 0; a < f; ++a) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < l; ++x) {
            const std::vector<cxd>& m = ensemble.measurement(x).effect_vector(a).amplitudes();
            cxd ov(0.0, 0.0);
            for (std::size_t i = 0; i < d; ++i) ov += std::conj(m[i]) * v[i];
            vals[x] = ensemble.prior(x) * std::norm(ov);
            lo = std::min(lo, vals[x]);
        }
        if (smoothing > 0.0) {
            double acc = 0.0;
            for (std::size_t x = 0; x < l; ++x) acc += std::exp(-(vals[x] - lo) / smoothing);
            total += lo - smoothing * std::log(acc);
        } else {
            total += lo;
        }
    }
    return total;
}

// Hyperspherical map: angles[0..d-2] set magnitudes, angles[d-1..2d-3] the
// phases of components 1..d-1; component 0 stays real (global phase fixed).
std::vector<cxd> probe_from_angles(const std::vector<double>& angles, std::size_t d) {
    std::vector<cxd> v(d);
    double tail = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        double r = tail;
        if (k + 1 < d) {
            r *= std::cos(angles[k]);
            tail *= std::sin(angles[k]);
        }
        v[k] = (k == 0) ? cxd(r, 0.0) : std::polar(r, angles[d - 1 + (k - 1)]);
    }
    return v;
}

double golden_section_max(double lo, double hi, const std::function<double(double)>& g) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = g(x1);
    double f2 = g(x2);
    for (int it = 0; it < 26; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = g(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

// Incremental orthonormal span for the selection search.  push returns true
// when the vector grew the span (residual above tol), false when dependent.
class SpanTracker {
  public:
    explicit SpanTracker(std::size_t dim) : dim_(dim) {}

    std::size_t rank() const { return basis_.size(); }

    bool push(const std::vector<cxd>& v, double dep_tol) {
        std::vector<cxd> r = residual(v);
        const double n2 = norm_squared(r);
        if (n2 <= dep_tol * dep_tol) return false;
        const double inv = 1.0 / std::sqrt(n2);
        for (cxd& c : r) c *= inv;
        basis_.push_back(std::move(r));
        return true;
    }

    void pop() { basis_.pop_back(); }

    std::vector<cxd> residual(const std::vector<cxd>& v) const {
        std::vector<cxd> r = v;
        for (const std::vector<cxd>& b : basis_) {
            cxd ov(0.0, 0.0);
            for (std::size_t i = 0; i < dim_; ++i) ov += std::conj(b[i]) * r[i];
            for (std::size_t i = 0; i < dim_; ++i) r[i] -= ov * b[i];
        }
        return r;
    }

  private:
    std::size_t dim_;
    std::vector<std::vector<cxd>> basis_;
};

constexpr double kDepTol = 1e-8;       // dense linear-dependence residual norm
constexpr double kSparseTol = 1e-9;    // frame coordinate treated as zero
constexpr double kSparseFloor = 1e-6;  // smallest coordinate trusted as real
constexpr double kCycleTol = 1e-8;     // constraint-cycle consistency

// Generic selection search: depth-first over per-outcome choices with an
// incremental orthonormal span.  Succeeds as soon as the span can no longer
// reach full dimension; the untried outcomes then default to setting 0.
struct DenseSearch {
    const MeasurementEnsemble& ensemble;
    SpanTracker span;
    std::vector<std::size_t>& selection;

    DenseSearch(const MeasurementEnsemble& e, std::vector<std::size_t>& sel)
        : ensemble(e), span(e.dim()), selection(sel) {}

    bool dfs(std::size_t depth) {
        if (span.rank() + (ensemble.outcomes() - depth) < ensemble.dim()) return true;
        if (depth == ensemble.outcomes()) return span.rank() < ensemble.dim();
        for (std::size_t x = 0; x < ensemble.settings(); ++x) {
            const std::vector<cxd>& v =
                ensemble.measurement(x).effect_vector(depth).amplitudes();
            selection[depth] = x;
            const bool grew = span.push(v, kDepTol);
            if (!grew || span.rank() < ensemble.dim()) {
                if (dfs(depth + 1)) return true;
            }
            if (grew) span.pop();
        }
        selection[depth] = 0;
        return false;
    }
};

// Effect vector expressed in the frame of measurement 0, keeping only the
// coordinates above kSparseTol; usable when at most two survive.
struct SparseCandidate {
    int i = -1;
    int j = -1;  // -1: single-coordinate vector, forces x_i = 0
    cxd ci;
    cxd cj;
};

// A vector orthogonal to every selected effect solves, coordinate-wise in the
// frame: two-coordinate vectors tie x_j = r x_i, one-coordinate vectors force
// x_i = 0.  Each graph component admits a one-dimensional solution space
// unless it is forced to zero or carries an inconsistent cycle; the selection
// spans a proper subspace iff some component stays free.  Union-find with an
// undo log; node weights store x_v relative to the component root.
class ConstraintGraph {
  public:
    explicit ConstraintGraph(std::size_t d)
        : parent_(d), weight_(d, cxd(1.0, 0.0)), size_(d, 1), zeroed_(d, 0), free_(d) {
        for (std::size_t v = 0; v < d; ++v) parent_[v] = v;
    }

    // Free components lost since construction; at most one per added vector.
    std::size_t drop() const { return parent_.size() - free_; }

    std::size_t mark() const { return log_.size(); }

    void rollback(std::size_t mark) {
        while (log_.size() > mark) {
            const Saved& s = log_.back();
            parent_[s.node] = s.parent;
            weight_[s.node] = s.weight;
            size_[s.node] = s.size;
            zeroed_[s.node] = s.zeroed;
            free_ = s.free_count;
            log_.pop_back();
        }
    }

    void add(const SparseCandidate& c) {
        if (c.j < 0) {
            ground(find(static_cast<std::size_t>(c.i)).first);
            return;
        }
        // conj(ci) x_i + conj(cj) x_j = 0
        const cxd r = -std::conj(c.ci) / std::conj(c.cj);
        const auto [ra, wa] = find(static_cast<std::size_t>(c.i));
        const auto [rb, wb] = find(static_cast<std::size_t>(c.j));
        if (ra == rb) {
            const cxd lhs = wb;
            const cxd rhs = r * wa;
            if (std::abs(lhs - rhs) > kCycleTol * (1.0 + std::abs(lhs) + std::abs(rhs))) {
                ground(ra);
            }
            return;
        }
        const std::size_t big = size_[ra] >= size_[rb] ? ra : rb;
        const std::size_t small = big == ra ? rb : ra;
        save(small);
        save(big);
        parent_[small] = big;
        weight_[small] = small == rb ? (r * wa) / wb : wb / (r * wa);
        size_[big] += size_[small];
        const int before = (zeroed_[ra] ? 0 : 1) + (zeroed_[rb] ? 0 : 1);
        const bool z = zeroed_[ra] || zeroed_[rb];
        free_ -= static_cast<std::size_t>(before - (z ? 0 : 1));
        zeroed_[big] = z;
    }

  private:
    struct Saved {
        std::size_t node;
        std::size_t parent;
        cxd weight;
        std::size_t size;
        bool zeroed;
        std::size_t free_count;
    };

    std::pair<std::size_t, cxd> find(std::size_t v) const {
        cxd w(1.0, 0.0);
        while (parent_[v] != v) {
            w *= weight_[v];
            v = parent_[v];
        }
        return {v, w};
    }

    void ground(std::size_t root) {
        if (zeroed_[root]) return;
        save(root);
        zeroed_[root] = true;
        --free_;
    }

    void save(std::size_t node) {
        log_.push_back({node, parent_[node], weight_[node], size_[node],
                        static_cast<bool>(zeroed_[node]), free_});
    }

    std::vector<std::size_t> parent_;
    std::vector<cxd> weight_;
    std::vector<std::size_t> size_;
    std::vector<char> zeroed_;
    std::size_t free_;
    std::vector<Saved> log_;
};

// Expresses every effect vector in the measurement-0 frame; false when any
// vector keeps more than two coordinates or has one in the gray band between
// kSparseTol and kSparseFloor (generic ensemble, dense fallback).
bool build_sparse_candidates(const MeasurementEnsemble& ensemble,
                             std::vector<std::vector<SparseCandidate>>& out) {
    const std::size_t d = ensemble.dim();
    const std::size_t f = ensemble.outcomes();
    const std::size_t l = ensemble.settings();
    out.assign(f, std::vector<SparseCandidate>(l));
    for (std::size_t a = 0; a < f; ++a) {
        for (std::size_t x = 0; x < l; ++x) {
            const PureState& v = ensemble.measurement(x).effect_vector(a);
            SparseCandidate c;
            int count = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const cxd coord = inner(ensemble.measurement(0).effect_vector(i), v);
                const double mag = std::abs(coord);
                if (mag <= kSparseTol) continue;
                if (mag < kSparseFloor) return false;
                if (count == 0) {
                    c.i = static_cast<int>(i);
                    c.ci = coord;
                } else if (count == 1) {
                    c.j = static_cast<int>(i);
                    c.cj = coord;
                } else {
                    return false;
                }
                ++count;
            }
            if (count == 0) return false;
            out[a][x] = c;
        }
    }
    return true;
}

// Selections factor across connected components of the outcome/coordinate
// incidence graph; each component is searched independently.
struct SparseSubproblem {
    std::vector<std::size_t> outcomes;
    std::size_t vertex_count = 0;
};

struct SparseSearch {
    const std::vector<std::vector<SparseCandidate>>& candidates;
    const SparseSubproblem& sub;
    ConstraintGraph& graph;
    std::vector<std::size_t>& selection;
    std::size_t settings;

    bool dfs(std::size_t depth) {
        const std::size_t free_here = sub.vertex_count - graph.drop();
        if (free_here > sub.outcomes.size() - depth) return true;
        if (free_here == 0) return false;
        const std::size_t a = sub.outcomes[depth];
        for (std::size_t x = 0; x < settings; ++x) {
            const std::size_t m = graph.mark();
            graph.add(candidates[a][x]);
            selection[a] = x;
            if (dfs(depth + 1)) return true;
            graph.rollback(m);
        }
        selection[a] = 0;
        return false;
    }
};

void guard_selection_count(std::size_t settings, std::size_t outcomes) {
    if (std::pow(static_cast<double>(settings), static_cast<double>(outcomes)) > 1e7) {
        throw CapabilityError("selection search too large: settings^outcomes exceeds 1e7");
    }
}

// Orthogonal-complement direction of the selected vectors (setting choice per
// outcome); the search guarantees their span misses at least one dimension.
PureState selection_witness(const MeasurementEnsemble& ensemble,
                            const std::vector<std::size_t>& selection) {
    const std::size_t d = ensemble.dim();
    SpanTracker span(d);
    for (std::size_t a = 0; a < selection.size(); ++a) {
        span.push(ensemble.measurement(selection[a]).effect_vector(a).amplitudes(), kDepTol);
    }
    std::vector<cxd> best;
    double best_n2 = -1.0;
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<cxd> e(d, cxd(0.0, 0.0));
        e[k] = cxd(1.0, 0.0);
        std::vector<cxd> r = span.residual(e);
        const double n2 = norm_squared(r);
        if (n2 > best_n2) {
            best_n2 = n2;
            best = std::move(r);
        }
    }
    const double inv = 1.0 / std::sqrt(best_n2);
    for (cxd& c : best) c *= inv;
    return PureState(best);
}

MeasurementEnsemble scaled_family(const BipartiteState& state, const FamilyChoice& choice,
                                  double param_scale, const Tolerances& tol, double& parameter) {
    switch (choice.kind) {
        case FamilyKind::R: {
            const double lambda = std::norm(state.coeff(0));
            const double tan2 = param_scale * 2.0 * choice.bound;
            parameter = std::atan(std::sqrt(tan2));
            return build_family_R({lambda, parameter, 0.0, state.basis_a()}, tol);
        }
        case FamilyKind::S: {
            const double p2 = std::min(param_scale * choice.bound, 0.98);
            parameter = std::sqrt(p2);
            return build_family_S({state.dim(), parameter, state.schmidt_coeffs(),
                                   state.basis_a()},
                                  tol);
        }
        case FamilyKind::Q: {
            const double p2 = std::min(param_scale * choice.bound, 0.98);
            parameter = std::sqrt(p2);
            return build_family_Q({state.dim(), parameter, state.schmidt_coeffs(),
                                   state.basis_a()},
                                  tol);
        }
    }
    throw ValidationError("unknown family kind");
}

}  // namespace

std::vector<OutcomeEnsemble> reduced_ensembles(const MeasurementEnsemble& ensemble,
                                               const BipartiteState& probe,
                                               const Tolerances& tol) {
    if (probe.dim() != ensemble.dim()) {
        throw DimensionError("probe A-side dimension does not match the measurement dimension");
    }
    const std::size_t d = ensemble.dim();
    const std::size_t f = ensemble.outcomes();
    const std::size_t l = ensemble.settings();
    const std::vector<cxd> phi = probe.to_vector().amplitudes();

    std::vector<OutcomeEnsemble> out(f);
    for (std::size_t a = 0; a < f; ++a) {
        out[a].outcome = a;
        out[a].reduced_states.resize(l);
        out[a].weights.assign(l, 0.0);
        for (std::size_t x = 0; x < l; ++x) {
            const std::vector<cxd>& m = ensemble.measurement(x).effect_vector(a).amplitudes();
            std::vector<cxd> w = steered_vector(phi, m, d);
            const double p = norm_squared(w);
            if (p <= kZeroWeight) continue;  // weight stays recorded as 0
            out[a].weights[x] = ensemble.prior(x) * p;
            const double inv = 1.0 / std::sqrt(p);
            for (cxd& c : w) c *= inv;
            out[a].reduced_states[x] = DensityOperator(PureState(std::move(w), tol));
        }
    }
    return out;
}

AmeResult ame_for_probe(const MeasurementEnsemble& ensemble, const BipartiteState& probe,
                        const SolverOptions& opts) {
    AmeResult result;
    std::vector<OutcomeEnsemble> reduced = reduced_ensembles(ensemble, probe);
    result.per_outcome.reserve(reduced.size());
    for (const OutcomeEnsemble& oe : reduced) {
        AmeOutcome item;
        item.outcome = oe.outcome;
        ExclusionInstance instance;
        for (std::size_t x = 0; x < oe.weights.size(); ++x) {
            if (!oe.reduced_states[x].has_value()) continue;
            instance.states.push_back(*oe.reduced_states[x]);
            instance.weights.push_back(oe.weights[x]);
            item.weight_sum += oe.weights[x];
        }
        if (!instance.states.empty()) {
            item.exclusion = as_value(instance, opts);
            item.as = item.exclusion.as_value;
        }
        result.ame += item.as;
        result.per_outcome.push_back(std::move(item));
    }
    return result;
}

double ams_evaluate(const MeasurementEnsemble& ensemble, const ProbeState& probe) {
    if (probe.state.dim() != ensemble.dim()) {
        throw DimensionError("probe dimension does not match the measurement dimension");
    }
    return 1.0 - inner_sum(ensemble, probe.state.amplitudes(), 0.0);
}

AmsOptimum ams_optimize(const MeasurementEnsemble& ensemble, std::size_t restarts,
                        std::uint64_t seed) {
    const std::size_t d = ensemble.dim();
    const std::size_t n_angles = 2 * d - 2;
    const double half_pi = std::asin(1.0);
    constexpr double kSmoothing = 1e-6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag_dist(0.0, half_pi);
    std::uniform_real_distribution<double> phase_dist(0.0, 4.0 * half_pi);

    const auto smoothed = [&](const std::vector<double>& ang) {
        return 1.0 - inner_sum(ensemble, probe_from_angles(ang, d), kSmoothing);
    };

    double best_value = -std::numeric_limits<double>::infinity();
    std::optional<PureState> best_probe;
    const std::size_t total = std::max<std::size_t>(restarts, 1);
    for (std::size_t r = 0; r < total; ++r) {
        std::vector<double> ang(n_angles, 0.0);
        if (r < d) {
            for (std::size_t k = 0; k < r; ++k) ang[k] = half_pi;  // start at basis vector r
        } else {
            for (std::size_t k = 0; k + 1 < d; ++k) ang[k] = mag_dist(rng);
            for (std::size_t k = d - 1; k < n_angles; ++k) ang[k] = phase_dist(rng);
        }

        double value = smoothed(ang);
        for (int sweep = 0; sweep < 50; ++sweep) {
            const double before = value;
            for (std::size_t c = 0; c < n_angles; ++c) {
                const bool is_phase = c >= d - 1;
                const double lo = is_phase ? ang[c] - 2.0 * half_pi : 0.0;
                const double hi = is_phase ? ang[c] + 2.0 * half_pi : half_pi;
                const double arg = golden_section_max(lo, hi, [&](double t) {
                    std::vector<double> trial = ang;
                    trial[c] = t;
                    return smoothed(trial);
                });
                std::vector<double> trial = ang;
                trial[c] = arg;
                const double cand = smoothed(trial);
                if (cand > value) {
                    value = cand;
                    ang = std::move(trial);
                }
            }
            if (value - before < 1e-10) break;
        }

        PureState probe(probe_from_angles(ang, d));
        const double exact = ams_evaluate(ensemble, {probe});
        if (exact > best_value) {
            best_value = exact;
            best_probe = std::move(probe);
        }
    }
    return AmsOptimum{best_value, ProbeState{std::move(*best_probe)}};
}

Lemma2Result lemma2_feasible(const MeasurementEnsemble& ensemble) {
    const std::size_t d = ensemble.dim();
    const std::size_t f = ensemble.outcomes();
    const std::size_t l = ensemble.settings();
    std::vector<std::size_t> selection(f, 0);
    bool found = false;

    std::vector<std::vector<SparseCandidate>> candidates;
    if (build_sparse_candidates(ensemble, candidates)) {
        // Union coordinates with the outcomes that can touch them; nodes
        // 0..d-1 are coordinates, d..d+f-1 outcomes.
        std::vector<std::size_t> parent(d + f);
        for (std::size_t v = 0; v < parent.size(); ++v) parent[v] = v;
        const auto find_root = [&](std::size_t v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        const auto unite = [&](std::size_t a, std::size_t b) {
            parent[find_root(a)] = find_root(b);
        };
        for (std::size_t a = 0; a < f; ++a) {
            for (std::size_t x = 0; x < l; ++x) {
                unite(static_cast<std::size_t>(candidates[a][x].i), d + a);
                if (candidates[a][x].j >= 0) {
                    unite(static_cast<std::size_t>(candidates[a][x].j), d + a);
                }
            }
        }
        std::vector<SparseSubproblem> subs(d + f);
        std::vector<std::size_t> order;
        for (std::size_t v = 0; v < d; ++v) ++subs[find_root(v)].vertex_count;
        for (std::size_t a = 0; a < f; ++a) {
            SparseSubproblem& s = subs[find_root(d + a)];
            if (s.outcomes.empty()) order.push_back(find_root(d + a));
            s.outcomes.push_back(a);
        }
        for (std::size_t root : order) {
            if (found) break;
            const SparseSubproblem& sub = subs[root];
            guard_selection_count(l, sub.outcomes.size());
            ConstraintGraph graph(d);
            SparseSearch search{candidates, sub, graph, selection, l};
            found = search.dfs(0);
        }
    } else {
        guard_selection_count(l, f);
        DenseSearch search(ensemble, selection);
        found = search.dfs(0);
    }

    Lemma2Result result;
    result.feasible = found;
    if (found) result.witness = ProbeState{selection_witness(ensemble, selection)};
    return result;
}

bool reduced_pairwise_overlap_check(const std::vector<OutcomeEnsemble>& ensembles) {
    for (const OutcomeEnsemble& oe : ensembles) {
        std::vector<const DensityOperator*> present;
        for (const std::optional<DensityOperator>& s : oe.reduced_states) {
            if (s.has_value()) present.push_back(&*s);
        }
        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = i + 1; j < present.size(); ++j) {
                const cxd ov = trace_product(present[i]->matrix(), present[j]->matrix());
                if (ov.real() <= 1e-9) return false;
            }
        }
    }
    return true;
}

const char* theorem_tag_name(TheoremTag tag) {
    switch (tag) {
        case TheoremTag::T1: return "T1";
        case TheoremTag::T2: return "T2";
        case TheoremTag::T3: return "T3";
    }
    return "?";
}

VerificationReport verify_theorem(const BipartiteState& state, const VerifyOptions& options) {
    const Tolerances tol;
    FamilyChoice choice = family_for_state(state, tol);

    VerificationReport report;
    switch (choice.kind) {
        case FamilyKind::R: report.theorem = TheoremTag::T1; break;
        case FamilyKind::S: report.theorem = TheoremTag::T2; break;
        case FamilyKind::Q: report.theorem = TheoremTag::T3; break;
    }
    report.bound = choice.bound;

    MeasurementEnsemble ensemble = choice.ensemble;
    report.parameter_used = choice.parameter;
    if (options.param_scale != 1.0) {
        ensemble = scaled_family(state, choice, options.param_scale, tol, report.parameter_used);
    }

    SolverOptions solver_opts;
    solver_opts.gap_tol = options.gap_tol;
    solver_opts.max_iterations = options.max_iterations;
    solver_opts.seed = options.seed;
    AmeResult ame = ame_for_probe(ensemble, state, solver_opts);
    report.ame = ame.ame;
    report.per_outcome_as.reserve(ame.per_outcome.size());
    for (const AmeOutcome& item : ame.per_outcome) {
        report.per_outcome_as.push_back({item.outcome, item.as, item.weight_sum});
    }

    report.ams_structural = lemma2_feasible(ensemble).feasible;
    report.ams_numeric_best = ams_optimize(ensemble, options.restarts, options.seed).best;
    report.passed = report.ame >= 1.0 - options.theorem_tol && !report.ams_structural &&
                    report.ams_numeric_best <= 1.0 - 1e-4;
    return report;
}

VerificationReport verify_theorem(const BipartiteState& state, double theorem_tol,
                                  std::uint64_t seed) {
    VerifyOptions options;
    options.theorem_tol = theorem_tol;
    options.seed = seed;
    return verify_theorem(state, options);
}

}  // namespace anticert
