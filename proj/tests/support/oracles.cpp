#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace oracle {

std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular system");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

Rows rows_of(const llmmc::InducedDtmc& chain) {
    Rows rows(chain.size());
    for (std::size_t s = 0; s < chain.size(); ++s) {
        for (const auto& t : chain.rows[s]) rows[s].emplace_back(t.target, t.probability);
    }
    return rows;
}

std::vector<bool> can_reach(const Rows& rows, const std::vector<bool>& target) {
    const std::size_t n = rows.size();
    std::vector<bool> reach = target;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            if (reach[s]) continue;
            for (const auto& [t, p] : rows[s]) {
                if (p > 0 && reach[t]) {
                    reach[s] = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    return reach;
}

std::vector<double> reach_probabilities(const Rows& rows, const std::vector<bool>& target) {
    const std::size_t n = rows.size();
    std::vector<bool> reach = can_reach(rows, target);
    std::vector<std::size_t> unknown;
    std::vector<long> col(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (reach[s] && !target[s]) {
            col[s] = static_cast<long>(unknown.size());
            unknown.push_back(s);
        }
    }
    Matrix a(unknown.size(), std::vector<double>(unknown.size(), 0.0));
    std::vector<double> b(unknown.size(), 0.0);
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        a[i][i] = 1.0;
        for (const auto& [t, p] : rows[unknown[i]]) {
            if (target[t]) {
                b[i] += p;
            } else if (col[t] >= 0) {
                a[i][static_cast<std::size_t>(col[t])] -= p;
            }
        }
    }
    std::vector<double> x = unknown.empty() ? std::vector<double>{} : gauss_solve(a, b);
    std::vector<double> out(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (target[s]) out[s] = 1.0;
    }
    for (std::size_t i = 0; i < unknown.size(); ++i) out[unknown[i]] = x[i];
    return out;
}

double bounded_reach_forward(const Rows& rows, const std::vector<bool>& target, std::size_t start, std::size_t k) {
    std::vector<double> mass(rows.size(), 0.0);
    mass[start] = 1.0;
    double hit = 0.0;
    for (std::size_t step = 0;; ++step) {
        for (std::size_t s = 0; s < rows.size(); ++s) {
            if (target[s]) {
                hit += mass[s];
                mass[s] = 0.0;
            }
        }
        if (step == k) break;
        std::vector<double> next(rows.size(), 0.0);
        for (std::size_t s = 0; s < rows.size(); ++s) {
            if (mass[s] == 0.0) continue;
            for (const auto& [t, p] : rows[s]) next[t] += mass[s] * p;
        }
        mass.swap(next);
    }
    return hit;
}

double monte_carlo_reach(const Rows& rows, const std::vector<bool>& target, std::size_t start,
                         std::size_t trajectories, std::mt19937_64& rng) {
    std::vector<bool> alive = can_reach(rows, target);
    std::vector<std::vector<double>> cumulative(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        double acc = 0.0;
        for (const auto& [t, p] : rows[s]) cumulative[s].push_back(acc += p);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trajectories; ++i) {
        std::size_t s = start;
        while (alive[s] && !target[s]) {
            double r = u(rng) * cumulative[s].back();
            auto it = std::upper_bound(cumulative[s].begin(), cumulative[s].end(), r);
            std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative[s].begin()),
                                                  rows[s].size() - 1);
            s = rows[s][j].first;
        }
        if (target[s]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trajectories);
}

Rows random_rows(std::size_t n, std::size_t max_degree, std::mt19937_64& rng) {
    Rows rows(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> degree(1, max_degree);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::bernoulli_distribution absorbing(0.1);
    for (std::size_t s = 0; s < n; ++s) {
        if (s > 0 && absorbing(rng)) {
            rows[s] = {{s, 1.0}};
            continue;
        }
        std::map<std::size_t, double> out;
        std::size_t d = degree(rng);
        while (out.size() < d) out.emplace(pick(rng), weight(rng));
        double total = 0.0;
        for (const auto& [t, w] : out) total += w;
        for (const auto& [t, w] : out) rows[s].emplace_back(t, w / total);
    }
    return rows;
}

llmmc::InducedDtmc chain_of(const Rows& rows, const std::vector<bool>& target, const std::string& label) {
    std::vector<std::vector<llmmc::Transition>> r(rows.size());
    std::vector<std::vector<std::string>> labels(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (const auto& [t, p] : rows[s]) r[s].push_back({t, p});
        if (target[s]) labels[s].push_back(label);
    }
    return llmmc::chain_from_rows(std::move(r), {label}, std::move(labels));
}

llmmc::InducedDtmc gambler_chain(int n, int k, std::vector<std::size_t>* index_of) {
    // fortune k first, then the others in increasing order
    std::vector<std::size_t> idx(static_cast<std::size_t>(n) + 1);
    std::size_t next = 1;
    for (int i = 0; i <= n; ++i) idx[static_cast<std::size_t>(i)] = i == k ? 0 : next++;
    Rows rows(idx.size());
    std::vector<bool> top(idx.size(), false);
    for (int i = 0; i <= n; ++i) {
        std::size_t s = idx[static_cast<std::size_t>(i)];
        if (i == 0 || i == n) {
            rows[s] = {{s, 1.0}};
        } else {
            rows[s] = {{idx[static_cast<std::size_t>(i - 1)], 0.5}, {idx[static_cast<std::size_t>(i + 1)], 0.5}};
        }
    }
    top[idx[static_cast<std::size_t>(n)]] = true;
    if (index_of != nullptr) *index_of = idx;
    return chain_of(rows, top, "top");
}

namespace frozen_lake {

bool is_hole(int pos) { return pos == 5 || pos == 7 || pos == 11 || pos == 12; }

namespace {

int shift(int pos, Move m) {
    int row = pos / 4;
    int col = pos % 4;
    switch (m) {
        case Move::up: row -= 1; break;
        case Move::down: row += 1; break;
        case Move::left: col -= 1; break;
        case Move::right: col += 1; break;
    }
    if (row < 0 || row > 3 || col < 0 || col > 3) return pos;  // blocked by the border
    return row * 4 + col;
}

std::pair<Move, Move> perpendicular(Move m) {
    if (m == Move::up || m == Move::down) return {Move::left, Move::right};
    return {Move::up, Move::down};
}

}  // namespace

std::map<int, double> step(int pos, Move move) {
    std::map<int, double> out;
    if (pos == 16) {
        out[16] = 1.0;
    } else if (is_hole(pos) || pos == 15) {
        out[16] = 1.0;
    } else {
        auto [a, b] = perpendicular(move);
        out[shift(pos, move)] += 1.0 / 3.0;
        out[shift(pos, a)] += 1.0 / 3.0;
        out[shift(pos, b)] += 1.0 / 3.0;
    }
    return out;
}

Closure closure(const Policy& policy) {
    Closure c;
    std::deque<int> work = {0};
    c.states.insert(0);
    std::map<int, std::map<int, double>> succ;
    while (!work.empty()) {
        int pos = work.front();
        work.pop_front();
        succ[pos] = pos == 16 ? std::map<int, double>{{16, 1.0}} : step(pos, policy(pos));
        for (const auto& [t, p] : succ[pos]) {
            c.transitions.insert({pos, t, p});
            if (c.states.insert(t).second) work.push_back(t);
        }
    }
    std::vector<int> order(c.states.begin(), c.states.end());
    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;
    Rows rows(order.size());
    std::vector<bool> water(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        water[i] = is_hole(order[i]);
        for (const auto& [t, p] : succ[order[i]]) rows[i].emplace_back(index[t], p);
    }
    std::vector<double> values = reach_probabilities(rows, water);
    for (std::size_t i = 0; i < order.size(); ++i) c.water_probability[order[i]] = values[i];
    return c;
}

}  // namespace frozen_lake

Rows read_tra(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header) || header != "dtmc") throw std::runtime_error("missing dtmc header");
    Rows rows;
    std::size_t src = 0;
    std::size_t dst = 0;
    double p = 0.0;
    while (in >> src >> dst >> p) {
        if (rows.size() <= std::max(src, dst)) rows.resize(std::max(src, dst) + 1);
        rows[src].emplace_back(dst, p);
    }
    if (!in.eof()) throw std::runtime_error("malformed transition line");
    return rows;
}

std::map<std::size_t, std::set<std::string>> read_lab(const std::string& text, std::vector<std::string>* declared) {
    std::istringstream in(text);
    std::string line;
    std::map<std::size_t, std::set<std::string>> out;
    if (!std::getline(in, line) || line != "#DECLARATION") throw std::runtime_error("missing #DECLARATION");
    if (!std::getline(in, line)) throw std::runtime_error("missing declarations");
    if (declared != nullptr) {
        std::istringstream names(line);
        std::string name;
        while (names >> name) declared->push_back(name);
    }
    if (!std::getline(in, line) || line != "#END") throw std::runtime_error("missing #END");
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) throw std::runtime_error("malformed label line: " + line);
        std::size_t state = std::stoul(line.substr(0, colon));
        std::istringstream names(line.substr(colon + 1));
        std::string name;
        while (names >> name) out[state].insert(name);
    }
    return out;
}

}  // namespace oracle
