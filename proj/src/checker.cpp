#include "llmmc/checker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Dense>

#include "llmmc/error.hpp"

namespace llmmc {

std::string_view to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::graph_only: return "graph_only";
        case SolveMethod::value_iteration: return "value_iteration";
        case SolveMethod::direct_solve: return "direct_solve";
        case SolveMethod::bounded_iteration: return "bounded_iteration";
    }
    return "unknown";
}

namespace {

constexpr double kBoundaryWidth = 1e-8;

using Predecessors = std::vector<std::vector<std::size_t>>;

Predecessors predecessors(const InducedDtmc& dtmc) {
    Predecessors pre(dtmc.size());
    for (std::size_t s = 0; s < dtmc.size(); ++s) {
        for (const auto& t : dtmc.rows[s]) {
            if (t.probability > 0.0) pre.at(t.target).push_back(s);
        }
    }
    return pre;
}

/// States that reach `seed` through states in `through` (seed states included).
std::vector<bool> backward_closure(const Predecessors& pre, const std::vector<bool>& seed,
                                   const std::vector<bool>& through) {
    std::vector<bool> reached = seed;
    std::deque<std::size_t> work;
    for (std::size_t s = 0; s < seed.size(); ++s) {
        if (seed[s]) work.push_back(s);
    }
    while (!work.empty()) {
        std::size_t s = work.front();
        work.pop_front();
        for (std::size_t p : pre[s]) {
            if (!reached[p] && through[p]) {
                reached[p] = true;
                work.push_back(p);
            }
        }
    }
    return reached;
}

void check_deadline(const SolverOptions& opts) {
    if (opts.deadline && Clock::now() >= *opts.deadline) {
        throw Error(ErrorKind::timeout, "wall-clock budget exhausted during model checking");
    }
}

std::vector<double> direct_solve(const InducedDtmc& dtmc, const QualitativeSets& q, const std::vector<bool>& maybe) {
    const std::size_t n = dtmc.size();
    std::vector<std::ptrdiff_t> column(n, -1);
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < n; ++s) {
        if (maybe[s]) {
            column[s] = static_cast<std::ptrdiff_t>(order.size());
            order.push_back(s);
        }
    }
    const auto m = static_cast<Eigen::Index>(order.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (const auto& t : dtmc.rows[order[static_cast<std::size_t>(i)]]) {
            if (column[t.target] >= 0) {
                a(i, column[t.target]) -= t.probability;
            } else if (q.prob1[t.target]) {
                b(i) += t.probability;
            }
        }
    }
    Eigen::VectorXd x = a.partialPivLu().solve(b);
    std::vector<double> values(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (q.prob1[s]) values[s] = 1.0;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        values[order[static_cast<std::size_t>(i)]] = std::clamp(x(i), 0.0, 1.0);
    }
    return values;
}

/// Gauss-Seidel in state index order. Stops once the per-sweep change and the
/// error bound derived from the observed contraction rate are both below the
/// tolerance.
std::vector<double> gauss_seidel(const InducedDtmc& dtmc, const QualitativeSets& q, const std::vector<bool>& maybe,
                                 const SolverOptions& opts, std::uint64_t& iterations, double& residual) {
    const std::size_t n = dtmc.size();
    std::vector<double> x(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (q.prob1[s]) x[s] = 1.0;
    }
    double previous = 0.0;
    for (iterations = 1; iterations <= opts.max_iterations; ++iterations) {
        if ((iterations & 63U) == 0) check_deadline(opts);
        double change = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (!maybe[s]) continue;
            double self = 0.0;
            double sum = 0.0;
            for (const auto& t : dtmc.rows[s]) {
                if (t.target == s) {
                    self += t.probability;
                } else {
                    sum += t.probability * x[t.target];
                }
            }
            // Maybe states always have an exit, so self < 1.
            double updated = std::clamp(sum / (1.0 - self), 0.0, 1.0);
            change = std::max(change, std::abs(updated - x[s]));
            x[s] = updated;
        }
        residual = change;
        if (change < opts.tolerance) {
            double rate = previous > 0.0 ? change / previous : 0.0;
            if (change == 0.0 || (rate < 1.0 && change * rate / (1.0 - rate) < opts.tolerance)) return x;
        }
        previous = change;
    }
    throw Error(ErrorKind::non_convergence, "value iteration did not converge within " +
                                                std::to_string(opts.max_iterations) + " iterations (residual " +
                                                std::to_string(residual) + ")");
}

std::vector<bool> negate(std::vector<bool> v) {
    v.flip();
    return v;
}

struct Evaluated {
    std::vector<bool> sat;
    std::optional<PathValues> probabilities;  // for probability operators
};

Evaluated evaluate(const InducedDtmc& dtmc, const StateFormula& f, const SolverOptions& opts);

PathValues path_values(const InducedDtmc& dtmc, const PathFormula& p, const SolverOptions& opts) {
    const std::size_t n = dtmc.size();
    const std::vector<bool> all(n, true);
    auto sat = [&](std::size_t i) { return evaluate(dtmc, p.operands.at(i), opts).sat; };
    switch (p.kind) {
        case PathFormula::Kind::next: return next_probabilities(dtmc, sat(0));
        case PathFormula::Kind::eventually:
            return p.step_bound ? bounded_until_probabilities(dtmc, all, sat(0), *p.step_bound, opts)
                                : until_probabilities(dtmc, all, sat(0), opts);
        case PathFormula::Kind::until:
            return p.step_bound ? bounded_until_probabilities(dtmc, sat(0), sat(1), *p.step_bound, opts)
                                : until_probabilities(dtmc, sat(0), sat(1), opts);
        case PathFormula::Kind::globally: {
            std::vector<bool> bad = negate(sat(0));
            PathValues v = p.step_bound ? bounded_until_probabilities(dtmc, all, bad, *p.step_bound, opts)
                                        : until_probabilities(dtmc, all, bad, opts);
            for (double& x : v.values) x = 1.0 - x;
            return v;
        }
    }
    throw Error(ErrorKind::evaluation, "unsupported path formula");
}

Evaluated evaluate(const InducedDtmc& dtmc, const StateFormula& f, const SolverOptions& opts) {
    const std::size_t n = dtmc.size();
    Evaluated out;
    switch (f.kind) {
        case StateFormula::Kind::constant: out.sat.assign(n, f.value); break;
        case StateFormula::Kind::atomic: {
            if (f.label != "init" &&
                std::find(dtmc.label_names.begin(), dtmc.label_names.end(), f.label) == dtmc.label_names.end()) {
                throw Error(ErrorKind::unknown_label, "unknown atomic proposition \"" + f.label + "\"");
            }
            out.sat.resize(n);
            for (std::size_t s = 0; s < n; ++s) out.sat[s] = dtmc.has_label(s, f.label);
            break;
        }
        case StateFormula::Kind::negation: out.sat = negate(evaluate(dtmc, f.operands[0], opts).sat); break;
        case StateFormula::Kind::conjunction:
        case StateFormula::Kind::disjunction: {
            std::vector<bool> a = evaluate(dtmc, f.operands[0], opts).sat;
            std::vector<bool> b = evaluate(dtmc, f.operands[1], opts).sat;
            out.sat.resize(n);
            for (std::size_t s = 0; s < n; ++s) {
                out.sat[s] = f.kind == StateFormula::Kind::conjunction ? a[s] && b[s] : a[s] || b[s];
            }
            break;
        }
        case StateFormula::Kind::probability: {
            PathValues v = path_values(dtmc, *f.path, opts);
            out.sat.assign(n, true);
            if (f.bound) {
                for (std::size_t s = 0; s < n; ++s) {
                    out.sat[s] = compare(f.bound->relation, v.values[s], f.bound->threshold);
                }
            }
            out.probabilities = std::move(v);
            break;
        }
    }
    return out;
}

}  // namespace

QualitativeSets qualitative_sets(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                                 const std::vector<bool>& target) {
    const std::size_t n = dtmc.size();
    Predecessors pre = predecessors(dtmc);
    std::vector<bool> through(n);
    for (std::size_t s = 0; s < n; ++s) through[s] = constraint[s] && !target[s];

    QualitativeSets q;
    q.prob0 = negate(backward_closure(pre, target, through));
    q.prob1 = negate(backward_closure(pre, q.prob0, through));
    return q;
}

PathValues next_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& target) {
    PathValues out;
    out.method = SolveMethod::bounded_iteration;
    out.iterations = 1;
    out.values.assign(dtmc.size(), 0.0);
    for (std::size_t s = 0; s < dtmc.size(); ++s) {
        double sum = 0.0;
        for (const auto& t : dtmc.rows[s]) {
            if (target[t.target]) sum += t.probability;
        }
        out.values[s] = std::min(sum, 1.0);
    }
    return out;
}

PathValues until_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                               const std::vector<bool>& target, const SolverOptions& opts) {
    const std::size_t n = dtmc.size();
    QualitativeSets q = qualitative_sets(dtmc, constraint, target);
    std::vector<bool> maybe(n);
    std::size_t undetermined = 0;
    for (std::size_t s = 0; s < n; ++s) {
        maybe[s] = !q.prob0[s] && !q.prob1[s];
        if (maybe[s]) ++undetermined;
    }

    PathValues out;
    if (undetermined == 0) {
        out.values.assign(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            if (q.prob1[s]) out.values[s] = 1.0;
        }
        return out;
    }
    check_deadline(opts);
    const bool direct_allowed = undetermined <= opts.direct_limit;
    if (opts.prefer_direct && direct_allowed) {
        out.method = SolveMethod::direct_solve;
        out.values = direct_solve(dtmc, q, maybe);
        return out;
    }
    out.method = SolveMethod::value_iteration;
    out.values = gauss_seidel(dtmc, q, maybe, opts, out.iterations, out.residual);
    if (opts.cross_check && direct_allowed) {
        std::vector<double> exact = direct_solve(dtmc, q, maybe);
        double deviation = 0.0;
        for (std::size_t s = 0; s < n; ++s) deviation = std::max(deviation, std::abs(exact[s] - out.values[s]));
        out.cross_check_deviation = deviation;
    }
    return out;
}

PathValues bounded_until_probabilities(const InducedDtmc& dtmc, const std::vector<bool>& constraint,
                                       const std::vector<bool>& target, std::uint64_t steps,
                                       const SolverOptions& opts) {
    const std::size_t n = dtmc.size();
    PathValues out;
    out.method = SolveMethod::bounded_iteration;
    std::vector<double> x(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) x[s] = target[s] ? 1.0 : 0.0;
    std::vector<double> next(n);
    for (std::uint64_t k = 0; k < steps; ++k) {
        if ((k & 63U) == 0) check_deadline(opts);
        double change = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (target[s] || !constraint[s]) {
                next[s] = x[s];
                continue;
            }
            double sum = 0.0;
            for (const auto& t : dtmc.rows[s]) sum += t.probability * x[t.target];
            next[s] = std::min(sum, 1.0);
            change = std::max(change, std::abs(next[s] - x[s]));
        }
        x.swap(next);
        ++out.iterations;
        out.residual = change;
        if (change == 0.0 && k > 0) break;  // fixed point: further steps change nothing
    }
    out.values = std::move(x);
    return out;
}

std::vector<bool> satisfying_states(const InducedDtmc& dtmc, const StateFormula& formula, const SolverOptions& opts) {
    return evaluate(dtmc, formula, opts).sat;
}

CheckResult check(const InducedDtmc& dtmc, const StateFormula& formula, const SolverOptions& opts) {
    if (dtmc.size() == 0) throw Error(ErrorKind::invalid_model, "cannot check an empty chain");
    Evaluated e = evaluate(dtmc, formula, opts);
    CheckResult r;
    if (formula.kind == StateFormula::Kind::probability) {
        PathValues& v = *e.probabilities;
        r.value = v.values[0];
        r.iterations = v.iterations;
        r.residual = v.residual;
        r.method = v.method;
        r.cross_check_deviation = v.cross_check_deviation;
        r.state_values = std::move(v.values);
        if (formula.bound) {
            r.satisfied = e.sat[0];
            r.boundary = std::abs(r.value - formula.bound->threshold) < kBoundaryWidth;
        }
    } else {
        r.state_values.resize(dtmc.size());
        for (std::size_t s = 0; s < dtmc.size(); ++s) r.state_values[s] = e.sat[s] ? 1.0 : 0.0;
        r.value = r.state_values[0];
        r.satisfied = e.sat[0];
    }
    return r;
}

}  // namespace llmmc
