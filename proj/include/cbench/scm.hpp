#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cbench/errors.hpp"
#include "cbench/graph.hpp"
#include "cbench/rng.hpp"

namespace cbench {

// Boolean expression over a node's parents: leaves are (possibly negated)
// parent references, internal nodes AND/OR. Immutable; copies share subtrees.
struct BoolExpr {
    enum class Op { leaf, and_, or_ };

    Op op = Op::leaf;
    int node = -1;
    bool negated = false;
    std::shared_ptr<const BoolExpr> lhs;
    std::shared_ptr<const BoolExpr> rhs;

    static BoolExpr leaf(int node, bool negated) {
        BoolExpr e;
        e.op = Op::leaf;
        e.node = node;
        e.negated = negated;
        return e;
    }

    static BoolExpr combine(Op op, BoolExpr l, BoolExpr r) {
        BoolExpr e;
        e.op = op;
        e.lhs = std::make_shared<const BoolExpr>(std::move(l));
        e.rhs = std::make_shared<const BoolExpr>(std::move(r));
        return e;
    }

    bool evaluate(const std::function<bool(int)>& value_of) const {
        switch (op) {
            case Op::leaf: {
                bool v = value_of(node);
                return negated ? !v : v;
            }
            case Op::and_: return lhs->evaluate(value_of) && rhs->evaluate(value_of);
            case Op::or_: return lhs->evaluate(value_of) || rhs->evaluate(value_of);
        }
        return false;
    }

    void collect_leaves(std::vector<int>& out) const {
        if (op == Op::leaf) {
            out.push_back(node);
            return;
        }
        lhs->collect_leaves(out);
        rhs->collect_leaves(out);
    }
};

// Grammar used for prose and serialization:
//   E := NAME | "not" NAME | "(" E "and" E ")" | "(" E "or" E ")"
// Names may span several words; they must not contain the keywords or
// parentheses. render/parse round-trip exactly.
inline std::string render_expr(const BoolExpr& e,
                               const std::function<std::string(int)>& name_of) {
    switch (e.op) {
        case BoolExpr::Op::leaf:
            return e.negated ? "not " + name_of(e.node) : name_of(e.node);
        case BoolExpr::Op::and_:
            return "(" + render_expr(*e.lhs, name_of) + " and " + render_expr(*e.rhs, name_of) + ")";
        case BoolExpr::Op::or_:
            return "(" + render_expr(*e.lhs, name_of) + " or " + render_expr(*e.rhs, name_of) + ")";
    }
    return {};
}

namespace detail {

struct ExprTokens {
    std::vector<std::string> tokens;
    size_t pos = 0;

    explicit ExprTokens(std::string_view text) {
        std::string word;
        auto flush = [&] {
            if (!word.empty()) {
                tokens.push_back(word);
                word.clear();
            }
        };
        for (char c : text) {
            if (c == '(' || c == ')') {
                flush();
                tokens.push_back(std::string(1, c));
            } else if (c == ' ' || c == '\t' || c == '\n') {
                flush();
            } else {
                word += c;
            }
        }
        flush();
    }

    bool done() const { return pos >= tokens.size(); }
    const std::string& peek() const {
        if (done()) throw ParseError("unexpected end of expression");
        return tokens[pos];
    }
    std::string take() {
        std::string t = peek();
        ++pos;
        return t;
    }
};

inline bool is_keyword(const std::string& t) {
    return t == "not" || t == "and" || t == "or" || t == "(" || t == ")";
}

inline std::string parse_name(ExprTokens& in) {
    std::string name;
    while (!in.done() && !is_keyword(in.peek())) {
        if (!name.empty()) name += " ";
        name += in.take();
    }
    if (name.empty()) throw ParseError("expected a name in expression");
    return name;
}

inline BoolExpr parse_expr_inner(ExprTokens& in,
                                 const std::function<int(const std::string&)>& node_of) {
    if (in.peek() == "(") {
        in.take();
        BoolExpr l = parse_expr_inner(in, node_of);
        std::string op = in.take();
        if (op != "and" && op != "or") throw ParseError("expected 'and' or 'or', got '" + op + "'");
        BoolExpr r = parse_expr_inner(in, node_of);
        if (in.take() != ")") throw ParseError("expected ')' in expression");
        return BoolExpr::combine(op == "and" ? BoolExpr::Op::and_ : BoolExpr::Op::or_,
                                 std::move(l), std::move(r));
    }
    bool neg = false;
    if (in.peek() == "not") {
        in.take();
        neg = true;
    }
    return BoolExpr::leaf(node_of(parse_name(in)), neg);
}

} // namespace detail

inline BoolExpr parse_expr(std::string_view text,
                           const std::function<int(const std::string&)>& node_of) {
    detail::ExprTokens in(text);
    BoolExpr e = detail::parse_expr_inner(in, node_of);
    if (!in.done()) throw ParseError("trailing tokens after expression");
    return e;
}

// Node id -> boolean state.
using Assignment = std::map<int, bool>;

// A tiered DAG plus one boolean structural function per node with parents.
struct BoolScm {
    TieredDag graph;
    std::map<int, BoolExpr> functions;
};

// Random structural functions. Per non-root node: parents are shuffled,
// then folded left to right with uniformly chosen AND/OR, each leaf negated
// with probability 1/2. Stream: Rng(seed).child("fn").child(node).
inline BoolScm generate_functions(const TieredDag& g, uint64_t seed) {
    BoolScm scm{g, {}};
    Rng fn = Rng(seed).child("fn");
    for (int v : g.topological_order()) {
        std::vector<int> parents = g.parents(v);
        if (parents.empty()) continue;
        Rng r = fn.child(static_cast<uint64_t>(v));
        for (size_t i = parents.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(r.uniform(i));
            std::swap(parents[i - 1], parents[j]);
        }
        BoolExpr expr = BoolExpr::leaf(parents[0], r.bernoulli(0.5));
        for (size_t i = 1; i < parents.size(); ++i) {
            BoolExpr::Op op = r.bernoulli(0.5) ? BoolExpr::Op::and_ : BoolExpr::Op::or_;
            expr = BoolExpr::combine(op, std::move(expr), BoolExpr::leaf(parents[i], r.bernoulli(0.5)));
        }
        scm.functions.emplace(v, std::move(expr));
    }
    return scm;
}

namespace detail {

inline void check_observed_is_roots(const BoolScm& scm, const Assignment& observed) {
    auto roots = scm.graph.roots();
    for (auto& [v, _] : observed)
        if (!roots.count(v))
            throw ContractError("observed assigns non-root node " + std::to_string(v));
    for (int v : roots)
        if (!observed.count(v))
            throw ContractError("observed is missing root node " + std::to_string(v));
}

} // namespace detail

// Total assignment from root observations, evaluating each structural
// function in topological order.
inline Assignment evaluate_factual(const BoolScm& scm, const Assignment& observed) {
    detail::check_observed_is_roots(scm, observed);
    Assignment values = observed;
    auto value_of = [&](int v) { return values.at(v); };
    for (int v : scm.graph.topological_order()) {
        auto it = scm.functions.find(v);
        if (it != scm.functions.end()) values[v] = it->second.evaluate(value_of);
    }
    return values;
}

// Mutilated evaluation: each intervened node loses its structural function
// (equivalently, its incoming edges) and is pinned to the intervention
// value, overriding an observation when the node is a root. Everything else
// evaluates as in evaluate_factual.
inline Assignment evaluate_counterfactual(const BoolScm& scm, const Assignment& observed,
                                          const Assignment& interventions) {
    detail::check_observed_is_roots(scm, observed);
    for (auto& [v, _] : interventions)
        if (v < 0 || v >= scm.graph.node_count())
            throw ContractError("intervention on unknown node " + std::to_string(v));
    Assignment values;
    auto value_of = [&](int v) { return values.at(v); };
    for (int v : scm.graph.topological_order()) {
        if (auto it = interventions.find(v); it != interventions.end()) {
            values[v] = it->second;
        } else if (auto fn = scm.functions.find(v); fn != scm.functions.end()) {
            values[v] = fn->second.evaluate(value_of);
        } else {
            values[v] = observed.at(v);
        }
    }
    return values;
}

} // namespace cbench
