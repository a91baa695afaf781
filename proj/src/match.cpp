#include "asploop/match.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace asploop {

std::string normalize_surface(std::string_view raw) {
    std::string out;
    bool gap = false;
    for (unsigned char c : raw) {
        if (std::isalnum(c)) {
            if (gap && !out.empty()) out += '_';
            gap = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            gap = true;
        }
    }
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::string to_string(MatchMethod m) { return m == MatchMethod::exact ? "exact" : "levenshtein"; }

std::string surface_of(const asp::Value& v) {
    if (v.kind() == asp::Value::Kind::string) return v.name();
    return asp::to_string(v);
}

namespace {

using Rows = std::vector<std::vector<std::string>>;

// Position -> category assignment maximizing membership, then closeness.
std::vector<std::size_t> reconcile(const Rows& rows, const std::vector<std::vector<std::string>>& members) {
    std::size_t m = members.size();
    std::vector<std::vector<std::size_t>> hits(m, std::vector<std::size_t>(m, 0));
    std::vector<std::vector<std::size_t>> dist(m, std::vector<std::size_t>(m, 0));
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t c = 0; c < m; ++c) {
            for (const auto& row : rows) {
                const auto& ms = members[c];
                if (std::find(ms.begin(), ms.end(), row[p]) != ms.end()) ++hits[p][c];
                std::size_t best = std::numeric_limits<std::size_t>::max();
                for (const auto& x : ms) best = std::min(best, edit_distance(row[p], x));
                dist[p][c] += best;
            }
        }
    }
    std::vector<std::size_t> perm(m), best;
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best_hits = 0, best_dist = 0;
    do {
        std::size_t h = 0, d = 0;
        for (std::size_t p = 0; p < m; ++p) {
            h += hits[p][perm[p]];
            d += dist[p][perm[p]];
        }
        if (best.empty() || h > best_hits || (h == best_hits && d < best_dist)) {
            best = perm;
            best_hits = h;
            best_dist = d;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool contains_either(const std::string& a, const std::string& b) {
    if (a.empty() || b.empty()) return false;
    return a.find(b) != std::string::npos || b.find(a) != std::string::npos;
}

}  // namespace

MatchReport match_tuples(const Rows& raw_rows, const PuzzleInstance& instance, bool allow_exact) {
    MatchReport r;
    std::size_t m = instance.m(), n = instance.n();
    for (const auto& row : raw_rows) {
        if (row.size() != m)
            throw std::invalid_argument("match_tuples: tuple arity " + std::to_string(row.size()) +
                                        " does not match category count " + std::to_string(m));
    }
    if (raw_rows.size() != n) {
        r.diagnostics.push_back("cardinality mismatch: " + std::to_string(raw_rows.size()) + " tuples, expected " +
                                std::to_string(n));
        return r;
    }

    Rows rows = raw_rows;
    for (auto& row : rows) {
        for (auto& x : row) x = normalize_surface(x);
    }
    std::vector<std::vector<std::string>> members(m);
    for (std::size_t c = 0; c < m; ++c) {
        for (const auto& x : instance.categories[c].members) members[c].push_back(normalize_surface(x));
    }
    Rows truth = instance.solution;
    for (auto& row : truth) {
        for (auto& x : row) x = normalize_surface(x);
    }

    r.position_category = reconcile(rows, members);

    if (allow_exact) {
        Rows reordered;
        for (const auto& row : rows) {
            std::vector<std::string> t(m);
            for (std::size_t p = 0; p < m; ++p) t[r.position_category[p]] = row[p];
            reordered.push_back(std::move(t));
        }
        std::multiset<std::vector<std::string>> a(reordered.begin(), reordered.end()), b(truth.begin(), truth.end());
        if (a == b) {
            r.matched = true;
            r.method = MatchMethod::exact;
            for (std::size_t i = 0; i < n; ++i) {
                auto it = std::find(reordered.begin(), reordered.end(), truth[i]);
                r.assignment_map[i] = static_cast<std::size_t>(it - reordered.begin());
            }
            return r;
        }
    }

    r.method = MatchMethod::levenshtein;
    r.item_matrix.assign(n, std::vector<ItemLink>(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const std::string& g = truth[i][k];
            std::optional<std::tuple<std::size_t, int, int, std::size_t, std::size_t>> best;
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t p = 0; p < m; ++p) {
                    auto key = std::make_tuple(edit_distance(g, rows[j][p]), contains_either(g, rows[j][p]) ? 0 : 1,
                                               r.position_category[p] == k ? 0 : 1, j, p);
                    if (!best || key < *best) best = key;
                }
            }
            auto [d, c, s, j, p] = *best;
            r.item_matrix[i][k] = ItemLink{i, k, j, p, d};
        }
    }

    std::set<std::size_t> used;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
        std::size_t j = r.item_matrix[i][0].row;
        for (const auto& link : r.item_matrix[i]) {
            if (link.row != j) {
                ok = false;
                r.diagnostics.push_back("ground-truth row " + std::to_string(i + 1) + " spreads over several computed rows");
                break;
            }
        }
        if (ok && !used.insert(j).second) {
            ok = false;
            r.diagnostics.push_back("computed row " + std::to_string(j + 1) + " claimed by two ground-truth rows");
        }
        if (ok) r.assignment_map[i] = j;
    }
    r.matched = ok;
    if (!ok) r.assignment_map.clear();
    return r;
}

MatchReport match_solution(const asp::AnswerSet& model, const PuzzleInstance& instance,
                           const std::string& target_predicate, bool allow_exact) {
    Rows rows;
    std::optional<std::size_t> other_arity;
    for (const auto& a : model.atoms) {
        if (a.predicate != target_predicate) continue;
        if (a.args.size() != instance.m()) {
            other_arity = a.args.size();
            continue;
        }
        std::vector<std::string> row;
        for (const auto& v : a.args) row.push_back(surface_of(v));
        rows.push_back(std::move(row));
    }
    if (rows.empty() && other_arity)
        throw std::invalid_argument("match_solution: " + target_predicate + "/" + std::to_string(*other_arity) +
                                    " does not have arity " + std::to_string(instance.m()));
    if (rows.empty()) {
        MatchReport r;
        r.diagnostics.push_back("model has no " + target_predicate + " atoms");
        return r;
    }
    return match_tuples(rows, instance, allow_exact);
}

std::optional<std::string> detect_target_predicate(const asp::AnswerSet& model, const PuzzleInstance& instance) {
    std::map<std::string, std::size_t> counts;
    for (const auto& a : model.atoms) {
        if (a.args.size() == instance.m()) ++counts[a.predicate];
    }
    auto it = counts.find("assignment");
    if (it != counts.end() && it->second == instance.n()) return it->first;
    for (const auto& [name, c] : counts) {
        if (c == instance.n()) return name;
    }
    if (it != counts.end()) return it->first;
    if (!counts.empty()) return counts.begin()->first;
    return std::nullopt;
}

}  // namespace asploop
