#include "asploop/solver.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace asploop::asp {

AnswerSet::AnswerSet(std::vector<GroundAtom> a) : atoms(std::move(a)) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
}

bool AnswerSet::contains(const GroundAtom& a) const { return std::binary_search(atoms.begin(), atoms.end(), a); }

std::string to_string(const AnswerSet& m) {
    std::string s;
    for (const auto& a : m.atoms) {
        if (!s.empty()) s += ' ';
        s += to_string(a);
    }
    return s;
}

namespace {

constexpr std::int64_t unbounded = std::numeric_limits<std::int64_t>::max();

// Truth of derived atoms for a complete selection: facts + chosen atoms, then
// each stratum run to fixpoint.
void close_under_rules(const GroundProgram& p, std::vector<char>& truth) {
    const auto& rules = p.rules();
    std::size_t begin = 0;
    while (begin < rules.size()) {
        std::size_t end = begin;
        while (end < rules.size() && rules[end].stratum == rules[begin].stratum) ++end;
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = begin; i < end; ++i) {
                const auto& r = rules[i];
                if (truth[r.head]) continue;
                bool fires = std::all_of(r.positive.begin(), r.positive.end(), [&](AtomId a) { return truth[a]; }) &&
                             std::none_of(r.negative.begin(), r.negative.end(), [&](AtomId a) { return truth[a]; });
                if (fires) {
                    truth[r.head] = 1;
                    changed = true;
                }
            }
        }
        begin = end;
    }
}

bool violated(const GroundConstraint& c, const std::vector<char>& truth) {
    return std::all_of(c.positive.begin(), c.positive.end(), [&](AtomId a) { return truth[a]; }) &&
           std::none_of(c.negative.begin(), c.negative.end(), [&](AtomId a) { return truth[a]; });
}

AnswerSet to_model(const GroundProgram& p, const std::vector<char>& truth) {
    std::vector<GroundAtom> atoms;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i]) atoms.push_back(p.atom(static_cast<AtomId>(i)));
    }
    return AnswerSet(std::move(atoms));
}

class Enumerator {
public:
    Enumerator(const GroundProgram& p, std::size_t cap, std::size_t keep) : p_(p), cap_(cap), keep_(keep) {}

    Enumeration run() {
        std::size_t n = p_.atoms().size();
        base_.assign(n, 0);
        for (auto f : p_.facts()) base_[f] = 1;

        std::vector<char> is_decision(n, 0), is_derived(n, 0);
        for (const auto& g : p_.choices()) {
            for (auto a : g.atoms) {
                if (!base_[a]) is_decision[a] = 1;
            }
        }
        for (const auto& r : p_.rules()) is_derived[r.head] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_decision[i]) decisions_.push_back(static_cast<AtomId>(i));
        }
        std::sort(decisions_.begin(), decisions_.end(),
                  [&](AtomId a, AtomId b) { return p_.atom(a) < p_.atom(b); });

        value_.assign(n, -1);
        groups_of_.assign(n, {});
        for (std::size_t gi = 0; gi < p_.choices().size(); ++gi) {
            const auto& g = p_.choices()[gi];
            Group grp;
            grp.lower = g.lower;
            grp.upper = g.upper ? *g.upper : unbounded;
            for (auto a : g.atoms) {
                if (base_[a]) {
                    ++grp.trues;
                } else {
                    ++grp.undecided;
                    groups_of_[a].push_back(groups_.size());
                }
            }
            if (grp.trues > grp.upper || grp.trues + grp.undecided < grp.lower) return done(true);
            groups_.push_back(grp);
        }

        clash_.assign(n, {});
        blocked_.assign(n, 0);
        pos_watch_.assign(n, {});
        neg_watch_.assign(n, {});
        for (std::size_t ci = 0; ci < p_.constraints().size(); ++ci) {
            const auto& c = p_.constraints()[ci];
            bool early = true;
            for (auto a : c.positive) early = early && is_decision[a] && !is_derived[a];
            for (auto a : c.negative) early = early && is_decision[a] && !is_derived[a];
            if (!early) {
                late_.push_back(ci);
                continue;
            }
            if (c.positive.empty() && c.negative.empty()) return done(true);
            if (c.positive.size() == 2 && c.negative.empty() && c.positive[0] != c.positive[1]) {
                clash_[c.positive[0]].push_back(c.positive[1]);
                clash_[c.positive[1]].push_back(c.positive[0]);
                continue;
            }
            Watched w;
            w.size = c.positive.size() + c.negative.size();
            for (auto a : c.positive) pos_watch_[a].push_back(watched_.size());
            for (auto a : c.negative) neg_watch_[a].push_back(watched_.size());
            watched_.push_back(w);
        }

        search(0);
        return done(!aborted_);
    }

private:
    struct Group {
        std::int64_t lower = 0, upper = unbounded;
        std::int64_t trues = 0, undecided = 0;
    };
    struct Watched {
        std::size_t size = 0, holding = 0;
    };

    Enumeration done(bool exhausted) {
        Enumeration e;
        e.found = found_;
        e.exhausted = exhausted;
        e.models = std::move(models_);
        std::sort(e.models.begin(), e.models.end());
        return e;
    }

    // Returns false on conflict; the assignment is recorded either way so that
    // unassign() can undo it.
    bool assign(AtomId a, bool v) {
        value_[a] = v ? 1 : 0;
        bool ok = true;
        for (auto gi : groups_of_[a]) {
            auto& g = groups_[gi];
            --g.undecided;
            if (v) ++g.trues;
            if (g.trues > g.upper || g.trues + g.undecided < g.lower) ok = false;
        }
        for (auto wi : v ? pos_watch_[a] : neg_watch_[a]) {
            if (++watched_[wi].holding == watched_[wi].size) ok = false;
        }
        if (v) {
            if (blocked_[a]) ok = false;
            for (auto b : clash_[a]) ++blocked_[b];
        }
        return ok;
    }

    // true would overflow a group; checked before touching the watch lists
    bool full(AtomId a) const {
        for (auto gi : groups_of_[a]) {
            if (groups_[gi].trues >= groups_[gi].upper) return true;
        }
        return false;
    }

    void unassign(AtomId a) {
        bool v = value_[a] == 1;
        for (auto gi : groups_of_[a]) {
            auto& g = groups_[gi];
            ++g.undecided;
            if (v) --g.trues;
        }
        for (auto wi : v ? pos_watch_[a] : neg_watch_[a]) --watched_[wi].holding;
        if (v) {
            for (auto b : clash_[a]) --blocked_[b];
        }
        value_[a] = -1;
    }

    void search(std::size_t depth) {
        if (aborted_) return;
        if (depth == decisions_.size()) {
            leaf();
            return;
        }
        AtomId a = decisions_[depth];
        for (bool v : {true, false}) {
            if (v && (blocked_[a] || full(a))) continue;
            if (assign(a, v)) search(depth + 1);
            unassign(a);
            if (aborted_) return;
        }
    }

    void leaf() {
        std::vector<char> truth = base_;
        for (auto a : decisions_) truth[a] = value_[a] == 1;
        close_under_rules(p_, truth);
        // a derived atom that was left unselected would give a duplicate model
        for (auto a : decisions_) {
            if (truth[a] && value_[a] != 1) return;
        }
        for (auto ci : late_) {
            if (violated(p_.constraints()[ci], truth)) return;
        }
        ++found_;
        if (models_.size() < keep_) models_.push_back(to_model(p_, truth));
        if (found_ > cap_) aborted_ = true;
    }

    const GroundProgram& p_;
    std::size_t cap_, keep_;
    std::vector<char> base_;
    std::vector<AtomId> decisions_;
    std::vector<signed char> value_;
    std::vector<Group> groups_;
    std::vector<std::vector<std::size_t>> groups_of_;
    std::vector<Watched> watched_;
    std::vector<std::vector<std::size_t>> pos_watch_, neg_watch_;
    // binary nogoods :- a, b. blocked_[x] counts true atoms clashing with x
    std::vector<std::vector<AtomId>> clash_;
    std::vector<std::size_t> blocked_;
    std::vector<std::size_t> late_;
    std::vector<AnswerSet> models_;
    std::size_t found_ = 0;
    bool aborted_ = false;
};

double binomial(std::size_t n, std::size_t k) {
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// All subsets of `atoms` with size in [lo, hi].
std::vector<std::vector<AtomId>> subsets(const std::vector<AtomId>& atoms, std::int64_t lo, std::int64_t hi) {
    std::vector<std::vector<AtomId>> out;
    std::vector<AtomId> cur;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == atoms.size()) {
            auto s = static_cast<std::int64_t>(cur.size());
            if (s >= lo && s <= hi) out.push_back(cur);
            return;
        }
        if (static_cast<std::int64_t>(cur.size()) < hi) {
            cur.push_back(atoms[i]);
            self(self, i + 1);
            cur.pop_back();
        }
        self(self, i + 1);
    };
    rec(rec, 0);
    return out;
}

}  // namespace

Enumeration enumerate_models(const GroundProgram& program, std::size_t cap, std::size_t keep) {
    if (cap < 1) throw std::invalid_argument("enumerate_models: cap must be at least 1");
    return Enumerator(program, cap, keep).run();
}

std::vector<AnswerSet> brute_force_models(const GroundProgram& program) {
    std::size_t n = program.atoms().size();
    std::vector<char> base(n, 0);
    for (auto f : program.facts()) base[f] = 1;

    struct Option {
        std::vector<AtomId> free;
        std::int64_t lo, hi;
    };
    std::vector<Option> opts;
    double space = 1;
    for (const auto& g : program.choices()) {
        Option o;
        std::int64_t fixed = 0;
        for (auto a : g.atoms) {
            if (base[a]) ++fixed;
            else o.free.push_back(a);
        }
        o.lo = std::max<std::int64_t>(0, g.lower - fixed);
        o.hi = g.upper ? *g.upper - fixed : static_cast<std::int64_t>(o.free.size());
        double count = 0;
        for (std::int64_t k = o.lo; k <= std::min<std::int64_t>(o.hi, o.free.size()); ++k)
            count += binomial(o.free.size(), static_cast<std::size_t>(k));
        space *= std::max(count, 1.0);
        if (space > brute_force_limit)
            throw SearchSpaceTooLarge("brute force search space exceeds 1e7 selections");
        opts.push_back(std::move(o));
    }

    std::vector<std::vector<std::vector<AtomId>>> per_group;
    for (const auto& o : opts) {
        per_group.push_back(subsets(o.free, o.lo, o.hi));
        if (per_group.back().empty()) return {};
    }

    std::set<AnswerSet> found;
    std::vector<std::size_t> idx(per_group.size(), 0);
    while (true) {
        std::vector<char> truth = base;
        for (std::size_t g = 0; g < per_group.size(); ++g) {
            for (auto a : per_group[g][idx[g]]) truth[a] = 1;
        }
        close_under_rules(program, truth);
        bool ok = true;
        for (const auto& g : program.choices()) {
            std::int64_t t = 0;
            for (auto a : g.atoms) t += truth[a];
            if (t < g.lower || (g.upper && t > *g.upper)) ok = false;
        }
        for (const auto& c : program.constraints()) {
            if (ok && violated(c, truth)) ok = false;
        }
        if (ok) found.insert(to_model(program, truth));

        std::size_t g = 0;
        while (g < idx.size() && ++idx[g] == per_group[g].size()) idx[g++] = 0;
        if (g == idx.size()) break;
    }
    return {found.begin(), found.end()};
}

}  // namespace asploop::asp
