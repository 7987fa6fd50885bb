#include "llmmc/dtmc.hpp"

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace llmmc {

bool InducedDtmc::has_label(std::size_t state, std::string_view label) const {
    if (label == "init") return state == 0;
    const auto& l = labels.at(state);
    return std::find(l.begin(), l.end(), label) != l.end();
}

InducedDtmc chain_from_rows(std::vector<std::vector<Transition>> rows, std::vector<std::string> label_names,
                            std::vector<std::vector<std::string>> labels) {
    InducedDtmc d;
    d.label_names = std::move(label_names);
    d.labels = std::move(labels);
    d.labels.resize(rows.size());
    d.states.resize(rows.size());
    d.decisions.resize(rows.size());
    d.stats.num_states = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.stats.num_transitions += rows[i].size();
        bool self_loop_only = rows[i].size() == 1 && rows[i][0].target == i;
        if (!self_loop_only) {
            d.decisions[i] = ActionDecision{"", "", false, DecisionSource::scripted};
        } else {
            ++d.stats.num_terminal_self_loops;
        }
    }
    d.rows = std::move(rows);
    return d;
}

namespace {

/// Decides queued states on worker threads so that slow oracles overlap.
/// Results are consumed by index; completion order does not matter.
class Prefetcher {
public:
    Prefetcher(const MdpSemantics& mdp, PolicyOracle& oracle, std::size_t workers) : mdp_(mdp), oracle_(oracle) {
        for (std::size_t i = 0; i < workers; ++i) {
            threads_.emplace_back([this] { run(); });
        }
    }

    ~Prefetcher() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
            queue_.clear();
        }
        wake_.notify_all();
        for (auto& t : threads_) t.join();
    }

    Prefetcher(const Prefetcher&) = delete;
    Prefetcher& operator=(const Prefetcher&) = delete;

    void submit(std::size_t index, const StateVector& s) {
        std::promise<ActionDecision> promise;
        {
            std::lock_guard lock(mutex_);
            results_.emplace(index, promise.get_future());
            queue_.push_back({s, std::move(promise)});
        }
        wake_.notify_one();
    }

    ActionDecision take(std::size_t index) {
        std::future<ActionDecision> f;
        {
            std::lock_guard lock(mutex_);
            auto it = results_.find(index);
            f = std::move(it->second);
            results_.erase(it);
        }
        return f.get();
    }

private:
    struct Job {
        StateVector state;
        std::promise<ActionDecision> promise;
    };

    void run() {
        for (;;) {
            Job job;
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (stopping_) return;
                job = std::move(queue_.front());
                queue_.pop_front();
            }
            try {
                job.promise.set_value(oracle_.decide(mdp_, job.state));
            } catch (...) {
                job.promise.set_exception(std::current_exception());
            }
        }
    }

    const MdpSemantics& mdp_;
    PolicyOracle& oracle_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::deque<Job> queue_;
    std::unordered_map<std::size_t, std::future<ActionDecision>> results_;
    bool stopping_ = false;
    std::vector<std::thread> threads_;
};

}  // namespace

InducedDtmc build_induced_dtmc(const MdpSemantics& mdp, PolicyOracle& oracle, const BuildLimits& limits) {
    const Clock::time_point start = Clock::now();
    const Clock::time_point deadline =
        limits.deadline.value_or(start + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(limits.wall_clock_budget_s)));
    const OracleCounters before = oracle.counters();

    InducedDtmc d;
    d.variable_names = mdp.variable_names();
    d.label_names = mdp.label_names();

    std::unordered_map<StateVector, std::size_t, StateVectorHash> index;
    std::optional<Prefetcher> prefetch;
    if (limits.prefetch_workers > 0) prefetch.emplace(mdp, oracle, limits.prefetch_workers);

    auto finish_stats = [&] {
        OracleCounters after = oracle.counters();
        d.stats.num_states = d.states.size();
        d.stats.llm_calls = after.llm_calls - before.llm_calls;
        d.stats.cache_hits = after.cache_hits - before.cache_hits;
        d.stats.build_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    };

    // Adds a state, returns its index; non-terminal states are handed to the prefetcher.
    auto discover = [&](StateVector s) {
        std::size_t id = d.states.size();
        if (limits.max_states != 0 && id >= limits.max_states) {
            finish_stats();
            throw BuildAborted(ErrorKind::state_limit,
                               "state limit of " + std::to_string(limits.max_states) + " exceeded", d.stats);
        }
        index.emplace(s, id);
        d.labels.push_back(mdp.label_set(s));
        if (prefetch && !mdp.enabled_actions(s).empty()) prefetch->submit(id, s);
        d.states.push_back(std::move(s));
        d.rows.emplace_back();
        d.decisions.emplace_back();
        return id;
    };

    discover(mdp.initial_state());
    for (std::size_t current = 0; current < d.states.size(); ++current) {
        if (Clock::now() >= deadline) {
            finish_stats();
            d.stats.timed_out = true;
            throw BuildAborted(ErrorKind::timeout, "wall-clock budget exhausted while building the chain", d.stats);
        }
        const StateVector s = d.states[current];
        if (mdp.enabled_actions(s).empty()) {
            d.rows[current] = {{current, 1.0}};
            ++d.stats.num_terminal_self_loops;
            ++d.stats.num_transitions;
            continue;
        }
        ActionDecision decision = prefetch ? prefetch->take(current) : oracle.decide(mdp, s);
        if (decision.faulty) {
            ++d.stats.faulty_actions;
            if (limits.strict_faulty) {
                finish_stats();
                throw BuildAborted(ErrorKind::faulty_action,
                                   "faulty action in state " + mdp.render(s) + " (raw output: \"" +
                                       decision.raw_output + "\")",
                                   d.stats);
            }
        }
        Distribution dist = mdp.successor_distribution(s, decision.action);
        std::vector<Transition> row;
        row.reserve(dist.support.size());
        // dist.support is sorted, so new states are numbered in lexicographic order.
        for (auto& succ : dist.support) {
            auto it = index.find(succ.state);
            std::size_t target = it != index.end() ? it->second : discover(succ.state);
            row.push_back({target, succ.probability});
        }
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
        d.stats.num_transitions += row.size();
        d.rows[current] = std::move(row);
        d.decisions[current] = std::move(decision);
    }
    finish_stats();
    return d;
}

std::string format_probability(double p) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
    return std::string(buf, end);
}

std::string transition_file_text(const InducedDtmc& dtmc) {
    std::string out = "dtmc\n";
    for (std::size_t s = 0; s < dtmc.size(); ++s) {
        for (const auto& t : dtmc.rows[s]) {
            out += std::to_string(s) + " " + std::to_string(t.target) + " " + format_probability(t.probability) + "\n";
        }
    }
    return out;
}

std::string label_file_text(const InducedDtmc& dtmc) {
    std::string out = "#DECLARATION\ninit";
    for (const auto& name : dtmc.label_names) out += " " + name;
    out += "\n#END\n";
    for (std::size_t s = 0; s < dtmc.size(); ++s) {
        std::vector<std::string> present;
        if (s == 0) present.emplace_back("init");
        for (const auto& name : dtmc.label_names) {
            if (dtmc.has_label(s, name) && name != "init") present.push_back(name);
        }
        if (present.empty()) continue;
        out += std::to_string(s) + ":";
        for (const auto& name : present) out += " " + name;
        out += "\n";
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

}  // namespace

void export_explicit(const InducedDtmc& dtmc, const std::filesystem::path& tra_path,
                     const std::filesystem::path& lab_path) {
    write_text(tra_path, transition_file_text(dtmc));
    write_text(lab_path, label_file_text(dtmc));
}

std::string decision_log(const InducedDtmc& dtmc) {
    std::string out;
    for (std::size_t s = 0; s < dtmc.size(); ++s) {
        if (!dtmc.decisions[s]) continue;
        const ActionDecision& d = *dtmc.decisions[s];
        std::string valuation;
        for (std::size_t v = 0; v < dtmc.variable_names.size() && v < dtmc.states[s].values.size(); ++v) {
            if (v > 0) valuation += ';';
            valuation += dtmc.variable_names[v] + "=" + std::to_string(dtmc.states[s].values[v]);
        }
        nlohmann::ordered_json j = {{"state", s},
                                    {"valuation", valuation},
                                    {"action", d.action},
                                    {"source", to_string(d.source)},
                                    {"faulty", d.faulty},
                                    {"raw_output", d.raw_output}};
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace llmmc
