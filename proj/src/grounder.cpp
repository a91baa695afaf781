#include "asploop/grounder.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

namespace asploop::asp {

std::optional<AtomId> GroundProgram::find(const GroundAtom& a) const {
    auto it = index_.find(to_string(a));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

AtomId GroundProgram::intern(GroundAtom a) {
    std::string key = to_string(a);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    auto id = static_cast<AtomId>(atoms_.size());
    atoms_.push_back(std::move(a));
    index_.emplace(std::move(key), id);
    return id;
}

namespace {

using Bindings = std::vector<std::pair<std::string, Value>>;

const Value* lookup(const Bindings& b, const std::string& name) {
    for (auto it = b.rbegin(); it != b.rend(); ++it) {
        if (it->first == name) return &it->second;
    }
    return nullptr;
}

void arithmetic_vars(const Term& t, bool inside, std::vector<std::string>& out) {
    switch (t.kind) {
    case Term::Kind::variable:
        if (inside && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
        return;
    case Term::Kind::binary:
    case Term::Kind::negate:
        for (const auto& a : t.args) arithmetic_vars(a, true, out);
        return;
    default:
        for (const auto& a : t.args) arithmetic_vars(a, inside, out);
    }
}

std::vector<std::string> vars_of(const Term& t) {
    std::vector<std::string> v;
    t.collect_variables(v);
    return v;
}

std::vector<std::string> vars_of(const Atom& a) {
    std::vector<std::string> v;
    for (const auto& t : a.args) t.collect_variables(v);
    return v;
}

std::vector<std::string> vars_of(const Comparison& c) {
    std::vector<std::string> v;
    c.lhs.collect_variables(v);
    c.rhs.collect_variables(v);
    return v;
}

bool subset(const std::vector<std::string>& xs, const std::vector<std::string>& bound) {
    return std::all_of(xs.begin(), xs.end(), [&](const std::string& x) {
        return std::find(bound.begin(), bound.end(), x) != bound.end();
    });
}

bool has_anonymous(const Comparison& c) { return c.lhs.contains_anonymous() || c.rhs.contains_anonymous(); }

bool has_anonymous(const Atom& a) {
    return std::any_of(a.args.begin(), a.args.end(), [](const Term& t) { return t.contains_anonymous(); });
}

struct Step {
    enum class Kind { match, check, bind };
    Kind kind;
    std::size_t literal;
    bool bind_lhs = false;  // for bind: which side is the unbound variable
};

struct Plan {
    std::vector<Step> steps;
    std::vector<std::size_t> negative_atoms;  // evaluated by the caller after the join
    std::vector<std::string> bound;
};

Value eval(const Term& t, const Bindings& b, std::size_t line) {
    switch (t.kind) {
    case Term::Kind::integer:
        return Value::integer(t.number);
    case Term::Kind::symbol:
        return Value::symbol(t.name);
    case Term::Kind::variable: {
        const Value* v = lookup(b, t.name);
        if (!v) throw GroundingError(line, "unsafe variable " + t.name);
        return *v;
    }
    case Term::Kind::anonymous:
        throw GroundingError(line, "unsafe anonymous variable");
    case Term::Kind::tuple: {
        std::vector<Value> items;
        items.reserve(t.args.size());
        for (const auto& a : t.args) items.push_back(eval(a, b, line));
        return Value::tuple(std::move(items));
    }
    case Term::Kind::negate: {
        Value x = eval(t.args[0], b, line);
        if (x.kind() != Value::Kind::integer)
            throw GroundingError(line, "arithmetic over non-integer term " + to_string(x) + " in " + to_string(t));
        return Value::integer(-x.number());
    }
    case Term::Kind::binary: {
        Value l = eval(t.args[0], b, line);
        Value r = eval(t.args[1], b, line);
        if (l.kind() != Value::Kind::integer || r.kind() != Value::Kind::integer) {
            const Value& bad = l.kind() != Value::Kind::integer ? l : r;
            throw GroundingError(line, "arithmetic over symbolic constant " + to_string(bad) + " in " + to_string(t));
        }
        std::int64_t out = 0;
        bool overflow = t.op == '+' ? __builtin_add_overflow(l.number(), r.number(), &out)
                                    : __builtin_sub_overflow(l.number(), r.number(), &out);
        if (overflow) throw GroundingError(line, "integer overflow in " + to_string(t));
        return Value::integer(out);
    }
    }
    return {};
}

bool match(const Term& pattern, const Value& v, Bindings& b, std::size_t line) {
    switch (pattern.kind) {
    case Term::Kind::variable:
        if (const Value* x = lookup(b, pattern.name)) return *x == v;
        b.emplace_back(pattern.name, v);
        return true;
    case Term::Kind::anonymous:
        return true;
    case Term::Kind::integer:
        return v.kind() == Value::Kind::integer && v.number() == pattern.number;
    case Term::Kind::symbol:
        return v.kind() == Value::Kind::symbol && v.name() == pattern.name;
    case Term::Kind::tuple:
        if (!v.is_tuple() || v.items().size() != pattern.args.size()) return false;
        for (std::size_t i = 0; i < pattern.args.size(); ++i) {
            if (!match(pattern.args[i], v.items()[i], b, line)) return false;
        }
        return true;
    case Term::Kind::binary:
    case Term::Kind::negate:
        return eval(pattern, b, line) == v;
    }
    return false;
}

GroundAtom instantiate(const Atom& a, const Bindings& b, std::size_t line) {
    GroundAtom g;
    g.predicate = a.predicate;
    g.args.reserve(a.args.size());
    for (const auto& t : a.args) g.args.push_back(eval(t, b, line));
    return g;
}

std::string sig_of(const GroundAtom& a) { return a.predicate + "/" + std::to_string(a.args.size()); }

void check_term_safety(const Term& t, std::size_t line) {
    if (t.contains_anonymous()) throw GroundingError(line, "unsafe anonymous variable in " + to_string(t));
}

Plan make_plan(const std::vector<BodyLiteral>& lits, std::vector<std::string> bound, const Statement& st) {
    Plan plan;
    std::vector<bool> done(lits.size(), false);
    std::size_t remaining = 0;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        const auto& l = lits[i];
        if (l.is_atom() && l.negated) {
            if (has_anonymous(l.atom()))
                throw UnsupportedConstruct(st.line, 1, "anonymous variable under negation");
            plan.negative_atoms.push_back(i);
            done[i] = true;
            continue;
        }
        if (!l.is_atom() && has_anonymous(l.comparison()))
            throw GroundingError(st.line, "unsafe anonymous variable in comparison " + to_string(l.comparison()));
        ++remaining;
    }

    while (remaining > 0) {
        std::optional<Step> next;
        for (std::size_t i = 0; i < lits.size() && !next; ++i) {
            if (!done[i] && !lits[i].is_atom() && subset(vars_of(lits[i].comparison()), bound))
                next = Step{Step::Kind::check, i};
        }
        for (std::size_t i = 0; i < lits.size() && !next; ++i) {
            if (done[i] || !lits[i].is_atom()) continue;
            std::vector<std::string> req;
            for (const auto& t : lits[i].atom().args) arithmetic_vars(t, false, req);
            if (subset(req, bound)) next = Step{Step::Kind::match, i};
        }
        for (std::size_t i = 0; i < lits.size() && !next; ++i) {
            if (done[i] || lits[i].is_atom() || lits[i].negated) continue;
            const auto& c = lits[i].comparison();
            if (c.op != CmpOp::eq) continue;
            if (c.lhs.kind == Term::Kind::variable && subset(vars_of(c.rhs), bound))
                next = Step{Step::Kind::bind, i, true};
            else if (c.rhs.kind == Term::Kind::variable && subset(vars_of(c.lhs), bound))
                next = Step{Step::Kind::bind, i, false};
        }
        if (!next) {
            for (std::size_t i = 0; i < lits.size(); ++i) {
                if (done[i]) continue;
                auto vs = lits[i].is_atom() ? vars_of(lits[i].atom()) : vars_of(lits[i].comparison());
                for (const auto& v : vs) {
                    if (std::find(bound.begin(), bound.end(), v) == bound.end())
                        throw GroundingError(st.line, "unsafe variable " + v + " in: " + st.source_text);
                }
            }
            throw GroundingError(st.line, "unsafe arithmetic in: " + st.source_text);
        }
        done[next->literal] = true;
        --remaining;
        const auto& l = lits[next->literal];
        if (next->kind == Step::Kind::match) {
            for (const auto& v : vars_of(l.atom()))
                if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
        } else if (next->kind == Step::Kind::bind) {
            const auto& c = l.comparison();
            bound.push_back(next->bind_lhs ? c.lhs.name : c.rhs.name);
        }
        plan.steps.push_back(*next);
    }
    for (auto i : plan.negative_atoms) {
        for (const auto& v : vars_of(lits[i].atom())) {
            if (std::find(bound.begin(), bound.end(), v) == bound.end())
                throw GroundingError(st.line, "unsafe variable " + v + " in: " + st.source_text);
        }
    }
    plan.bound = std::move(bound);
    return plan;
}

void require_bound(const std::vector<std::string>& vars, const std::vector<std::string>& bound, const Statement& st) {
    for (const auto& v : vars) {
        if (std::find(bound.begin(), bound.end(), v) == bound.end())
            throw GroundingError(st.line, "unsafe variable " + v + " in: " + st.source_text);
    }
}

}  // namespace

class Grounder {
public:
    explicit Grounder(const std::vector<Statement>& stmts) : stmts_(stmts) {}

    GroundProgram run() {
        g_.statement_count_ = stmts_.size();
        analyse();
        evaluate_fixed();
        ground_choices();
        add_guessed_facts();
        saturate_possible();
        ground_final();
        for (auto f : fixed_facts_) g_.facts_.push_back(f);
        std::sort(g_.facts_.begin(), g_.facts_.end());
        g_.facts_.erase(std::unique(g_.facts_.begin(), g_.facts_.end()), g_.facts_.end());
        return std::move(g_);
    }

private:
    using Domain = std::vector<AtomId>;

    // ---- analysis ---------------------------------------------------------

    void analyse() {
        std::set<std::string> heads;
        for (const auto& s : stmts_) {
            if (s.head) heads.insert(s.head->signature());
            for (const auto& e : s.elements) heads.insert(e.atom.signature());
        }

        auto warn_body = [&](const Statement& s, const std::vector<BodyLiteral>& lits) {
            for (const auto& l : lits) {
                if (l.is_atom() && !heads.count(l.atom().signature())) {
                    g_.warnings_.push_back("line " + std::to_string(s.line) +
                                           ": info: atom does not occur in any rule head: " + to_string(l.atom()));
                }
            }
        };
        for (const auto& s : stmts_) {
            warn_body(s, s.body);
            for (const auto& e : s.elements) warn_body(s, e.condition);
        }

        // guessed = choice heads plus everything depending on them
        for (const auto& s : stmts_) {
            for (const auto& e : s.elements) guessed_.insert(e.atom.signature());
        }
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& s : stmts_) {
                if (!s.head || guessed_.count(s.head->signature())) continue;
                for (const auto& l : s.body) {
                    if (l.is_atom() && guessed_.count(l.atom().signature())) {
                        guessed_.insert(s.head->signature());
                        changed = true;
                        break;
                    }
                }
            }
        }
        for (const auto& s : stmts_) {
            if (s.kind != StatementKind::choice) continue;
            auto check = [&](const std::vector<BodyLiteral>& lits) {
                for (const auto& l : lits) {
                    if (l.is_atom() && guessed_.count(l.atom().signature()))
                        throw UnsupportedConstruct(s.line, 1, "choice rule conditioned on guessed atom " +
                                                                  l.atom().signature());
                }
            };
            check(s.body);
            for (const auto& e : s.elements) check(e.condition);
        }

        // strata over head -> body dependencies
        struct Edge {
            std::string head, body;
            bool negative;
        };
        std::vector<Edge> edges;
        std::set<std::string> sigs = heads;
        for (const auto& s : stmts_) {
            std::vector<std::string> hs;
            if (s.head) hs.push_back(s.head->signature());
            for (const auto& e : s.elements) hs.push_back(e.atom.signature());
            auto add = [&](const std::vector<BodyLiteral>& lits) {
                for (const auto& l : lits) {
                    if (!l.is_atom()) continue;
                    sigs.insert(l.atom().signature());
                    for (const auto& h : hs) edges.push_back({h, l.atom().signature(), l.negated});
                }
            };
            add(s.body);
            for (const auto& e : s.elements) add(e.condition);
        }
        for (const auto& s : sigs) stratum_[s] = 0;
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& e : edges) {
                std::size_t need = stratum_[e.body] + (e.negative ? 1 : 0);
                if (stratum_[e.head] < need) {
                    stratum_[e.head] = need;
                    changed = true;
                    if (need > sigs.size()) {
                        std::size_t line = 0;
                        for (const auto& s : stmts_) {
                            if (s.head && s.head->signature() == e.head) {
                                line = s.line;
                                break;
                            }
                        }
                        throw UnsupportedConstruct(line, 1, "unstratified negation through " + e.head);
                    }
                }
            }
        }
    }

    bool is_guessed(const std::string& sig) const { return guessed_.count(sig) > 0; }

    // ---- domains ----------------------------------------------------------

    const Domain& domain(const std::string& sig) {
        static const Domain empty;
        auto it = domains_.find(sig);
        return it == domains_.end() ? empty : it->second;
    }

    // Domain members with the given value at argument pos, in domain order.
    // Rebuilt whenever the domain has grown since the last build.
    const Domain& indexed(const std::string& sig, std::size_t pos, const Value& v) {
        static const Domain empty;
        const Domain& dom = domain(sig);
        auto& idx = arg_index_[sig];
        if (idx.size_at_build != dom.size() || idx.by_pos.empty()) {
            idx.size_at_build = dom.size();
            idx.by_pos.clear();
            for (auto id : dom) {
                const auto& args = g_.atom(id).args;
                if (idx.by_pos.size() < args.size()) idx.by_pos.resize(args.size());
                for (std::size_t i = 0; i < args.size(); ++i) idx.by_pos[i][args[i]].push_back(id);
            }
        }
        if (pos >= idx.by_pos.size()) return empty;
        auto it = idx.by_pos[pos].find(v);
        return it == idx.by_pos[pos].end() ? empty : it->second;
    }

    bool in_domain(AtomId id) const { return id < member_.size() && member_[id]; }

    bool add_to_domain(AtomId id) {
        if (member_.size() <= id) member_.resize(id + 1, 0);
        if (member_[id]) return false;
        member_[id] = 1;
        domains_[sig_of(g_.atom(id))].push_back(id);
        return true;
    }

    /// Enumerates join results. Domains must not change during the call.
    void join(const std::vector<BodyLiteral>& lits, const Plan& plan, const Statement& st, Bindings& b,
              std::vector<AtomId>& matched, const std::function<void(Bindings&, const std::vector<AtomId>&)>& emit,
              std::size_t step = 0) {
        if (step == plan.steps.size()) {
            emit(b, matched);
            return;
        }
        const Step& s = plan.steps[step];
        const BodyLiteral& l = lits[s.literal];
        std::size_t mark = b.size();
        switch (s.kind) {
        case Step::Kind::check: {
            const auto& c = l.comparison();
            bool holds = evaluate(c.op, eval(c.lhs, b, st.line), eval(c.rhs, b, st.line));
            if (holds != l.negated) join(lits, plan, st, b, matched, emit, step + 1);
            return;
        }
        case Step::Kind::bind: {
            const auto& c = l.comparison();
            const Term& var = s.bind_lhs ? c.lhs : c.rhs;
            const Term& expr = s.bind_lhs ? c.rhs : c.lhs;
            b.emplace_back(var.name, eval(expr, b, st.line));
            join(lits, plan, st, b, matched, emit, step + 1);
            b.resize(mark);
            return;
        }
        case Step::Kind::match: {
            const Atom& a = l.atom();
            const std::string sig = a.signature();
            const Domain* candidates = &domain(sig);
            // narrow by the first argument already fixed by constants or bindings
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                const Term& t = a.args[i];
                std::optional<Value> key;
                if (t.kind == Term::Kind::integer) key = Value::integer(t.number);
                else if (t.kind == Term::Kind::symbol) key = Value::symbol(t.name);
                else if (t.kind == Term::Kind::variable) {
                    if (const Value* v = lookup(b, t.name)) key = *v;
                }
                if (key) {
                    candidates = &indexed(sig, i, *key);
                    break;
                }
            }
            const Domain& dom = *candidates;
            for (std::size_t k = 0; k < dom.size(); ++k) {
                AtomId id = dom[k];
                const GroundAtom& ga = g_.atom(id);
                bool ok = true;
                for (std::size_t i = 0; i < a.args.size() && ok; ++i) ok = match(a.args[i], ga.args[i], b, st.line);
                if (ok) {
                    matched.push_back(id);
                    join(lits, plan, st, b, matched, emit, step + 1);
                    matched.pop_back();
                }
                b.resize(mark);
            }
            return;
        }
        }
    }

    void for_each_instance(const Statement& st, const std::vector<BodyLiteral>& lits, const Plan& plan, Bindings& b,
                           const std::function<void(Bindings&, const std::vector<AtomId>&)>& emit) {
        std::vector<AtomId> matched;
        join(lits, plan, st, b, matched, emit);
    }

    // ---- phases -----------------------------------------------------------

    bool fixed_true(const GroundAtom& a) {
        auto id = g_.find(a);
        return id && in_domain(*id) && !is_guessed(sig_of(a));
    }

    void evaluate_fixed() {
        std::map<std::size_t, std::vector<std::size_t>> by_stratum;
        for (std::size_t i = 0; i < stmts_.size(); ++i) {
            const auto& s = stmts_[i];
            if ((s.kind == StatementKind::fact || s.kind == StatementKind::rule) && !is_guessed(s.head->signature()))
                by_stratum[stratum_[s.head->signature()]].push_back(i);
        }
        for (auto& [stratum, idxs] : by_stratum) {
            std::vector<Plan> plans;
            for (auto i : idxs) {
                plans.push_back(make_plan(stmts_[i].body, {}, stmts_[i]));
                require_bound(vars_of(*stmts_[i].head), plans.back().bound, stmts_[i]);
                for (const auto& t : stmts_[i].head->args) check_term_safety(t, stmts_[i].line);
            }
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t k = 0; k < idxs.size(); ++k) {
                    const auto& st = stmts_[idxs[k]];
                    std::vector<GroundAtom> fresh;
                    Bindings b;
                    for_each_instance(st, st.body, plans[k], b, [&](Bindings& bb, const std::vector<AtomId>&) {
                        for (auto ni : plans[k].negative_atoms) {
                            if (fixed_true(instantiate(st.body[ni].atom(), bb, st.line))) return;
                        }
                        fresh.push_back(instantiate(*st.head, bb, st.line));
                    });
                    for (auto& a : fresh) {
                        AtomId id = g_.intern(std::move(a));
                        if (add_to_domain(id)) {
                            fixed_facts_.push_back(id);
                            changed = true;
                        }
                    }
                }
            }
        }
    }

    void ground_choices() {
        for (std::size_t i = 0; i < stmts_.size(); ++i) {
            const auto& st = stmts_[i];
            if (st.kind != StatementKind::choice) continue;
            Plan body_plan = make_plan(st.body, {}, st);
            std::vector<Plan> element_plans;
            for (const auto& e : st.elements) {
                element_plans.push_back(make_plan(e.condition, body_plan.bound, st));
                require_bound(vars_of(e.atom), element_plans.back().bound, st);
                for (const auto& t : e.atom.args) check_term_safety(t, st.line);
            }
            std::vector<GroundChoice> found;
            std::vector<GroundAtom> candidates;
            Bindings b;
            for_each_instance(st, st.body, body_plan, b, [&](Bindings& bb, const std::vector<AtomId>&) {
                for (auto ni : body_plan.negative_atoms) {
                    if (fixed_true(instantiate(st.body[ni].atom(), bb, st.line))) return;
                }
                GroundChoice gc;
                gc.lower = st.lower;
                gc.upper = st.upper;
                gc.statement = i;
                std::vector<GroundAtom> atoms;
                for (std::size_t k = 0; k < st.elements.size(); ++k) {
                    const auto& e = st.elements[k];
                    for_each_instance(st, e.condition, element_plans[k], bb,
                                      [&](Bindings& eb, const std::vector<AtomId>&) {
                                          for (auto ni : element_plans[k].negative_atoms) {
                                              if (fixed_true(instantiate(e.condition[ni].atom(), eb, st.line))) return;
                                          }
                                          atoms.push_back(instantiate(e.atom, eb, st.line));
                                      });
                }
                for (auto& a : atoms) {
                    AtomId id = g_.intern(std::move(a));
                    if (std::find(gc.atoms.begin(), gc.atoms.end(), id) == gc.atoms.end()) gc.atoms.push_back(id);
                }
                found.push_back(std::move(gc));
            });
            for (auto& gc : found) {
                for (auto id : gc.atoms) add_to_domain(id);
                g_.choices_.push_back(std::move(gc));
            }
        }
    }

    void add_guessed_facts() {
        for (const auto& st : stmts_) {
            if (st.kind != StatementKind::fact || !is_guessed(st.head->signature())) continue;
            for (const auto& t : st.head->args) check_term_safety(t, st.line);
            require_bound(vars_of(*st.head), {}, st);
            AtomId id = g_.intern(instantiate(*st.head, {}, st.line));
            add_to_domain(id);
            if (static_facts_.insert(id).second) g_.facts_.push_back(id);
        }
    }

    void saturate_possible() {
        std::vector<std::size_t> idxs;
        for (std::size_t i = 0; i < stmts_.size(); ++i) {
            const auto& s = stmts_[i];
            if (s.kind == StatementKind::rule && is_guessed(s.head->signature())) idxs.push_back(i);
        }
        std::vector<Plan> plans;
        for (auto i : idxs) {
            plans.push_back(make_plan(stmts_[i].body, {}, stmts_[i]));
            require_bound(vars_of(*stmts_[i].head), plans.back().bound, stmts_[i]);
            for (const auto& t : stmts_[i].head->args) check_term_safety(t, stmts_[i].line);
        }
        guessed_plans_.assign(plans.begin(), plans.end());
        guessed_rules_ = idxs;
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t k = 0; k < idxs.size(); ++k) {
                const auto& st = stmts_[idxs[k]];
                std::vector<GroundAtom> fresh;
                Bindings b;
                for_each_instance(st, st.body, plans[k], b, [&](Bindings& bb, const std::vector<AtomId>&) {
                    fresh.push_back(instantiate(*st.head, bb, st.line));
                });
                for (auto& a : fresh) {
                    if (add_to_domain(g_.intern(std::move(a)))) changed = true;
                }
            }
        }
    }

    /// Splits matched/negated atoms into residual literals. Returns false when
    /// the instance can never fire.
    bool residual(const Statement& st, const std::vector<BodyLiteral>& lits, const Plan& plan, const Bindings& b,
                  const std::vector<AtomId>& matched, std::vector<AtomId>& pos, std::vector<AtomId>& neg) {
        for (auto id : matched) {
            if (is_guessed(sig_of(g_.atom(id))) && !static_facts_.count(id)) pos.push_back(id);
        }
        for (auto ni : plan.negative_atoms) {
            GroundAtom a = instantiate(lits[ni].atom(), b, st.line);
            auto id = g_.find(a);
            if (!id || !in_domain(*id)) continue;  // underivable: "not a" holds
            if (!is_guessed(sig_of(a)) || static_facts_.count(*id)) return false;
            neg.push_back(*id);
        }
        std::sort(pos.begin(), pos.end());
        pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
        std::sort(neg.begin(), neg.end());
        neg.erase(std::unique(neg.begin(), neg.end()), neg.end());
        for (auto id : pos) {
            if (std::binary_search(neg.begin(), neg.end(), id)) return false;
        }
        return true;
    }

    void add_constraint(std::vector<AtomId> pos, std::vector<AtomId> neg, std::size_t statement) {
        auto key = std::make_pair(pos, neg);
        if (!seen_constraints_.insert(key).second) return;
        g_.constraints_.push_back({std::move(pos), std::move(neg), statement});
    }

    void ground_final() {
        for (std::size_t k = 0; k < guessed_rules_.size(); ++k) {
            const auto& st = stmts_[guessed_rules_[k]];
            const Plan& plan = guessed_plans_[k];
            Bindings b;
            std::vector<GroundRule> out;
            for_each_instance(st, st.body, plan, b, [&](Bindings& bb, const std::vector<AtomId>& matched) {
                GroundRule r;
                if (!residual(st, st.body, plan, bb, matched, r.positive, r.negative)) return;
                auto head = g_.find(instantiate(*st.head, bb, st.line));
                r.head = *head;
                r.stratum = stratum_[st.head->signature()];
                r.statement = guessed_rules_[k];
                out.push_back(std::move(r));
            });
            for (auto& r : out) g_.rules_.push_back(std::move(r));
        }
        std::stable_sort(g_.rules_.begin(), g_.rules_.end(),
                         [](const GroundRule& a, const GroundRule& b) { return a.stratum < b.stratum; });

        for (std::size_t i = 0; i < stmts_.size(); ++i) {
            const auto& st = stmts_[i];
            if (st.kind != StatementKind::constraint && st.kind != StatementKind::cardinality) continue;
            Plan plan = make_plan(st.body, {}, st);
            for (const auto& c : st.comparisons) {
                if (has_anonymous(c)) throw GroundingError(st.line, "unsafe anonymous variable in " + to_string(c));
                require_bound(vars_of(c), plan.bound, st);
            }
            Bindings b;
            for_each_instance(st, st.body, plan, b, [&](Bindings& bb, const std::vector<AtomId>& matched) {
                if (st.kind == StatementKind::cardinality) {
                    std::int64_t holds = 0;
                    for (const auto& c : st.comparisons) {
                        if (evaluate(c.op, eval(c.lhs, bb, st.line), eval(c.rhs, bb, st.line))) ++holds;
                    }
                    if (holds == st.count) return;
                }
                std::vector<AtomId> pos, neg;
                if (!residual(st, st.body, plan, bb, matched, pos, neg)) return;
                add_constraint(std::move(pos), std::move(neg), i);
            });
        }
    }

    const std::vector<Statement>& stmts_;
    GroundProgram g_;
    std::set<std::string> guessed_;
    std::map<std::string, std::size_t> stratum_;
    std::unordered_map<std::string, Domain> domains_;
    struct ArgIndex {
        std::size_t size_at_build = 0;
        std::vector<std::map<Value, Domain>> by_pos;
    };
    std::unordered_map<std::string, ArgIndex> arg_index_;
    std::vector<char> member_;
    std::vector<AtomId> fixed_facts_;
    std::unordered_set<AtomId> static_facts_;
    std::vector<std::size_t> guessed_rules_;
    std::vector<Plan> guessed_plans_;
    std::set<std::pair<std::vector<AtomId>, std::vector<AtomId>>> seen_constraints_;
};

GroundProgram ground(const std::vector<Statement>& statements) { return Grounder(statements).run(); }

}  // namespace asploop::asp
