#pragma once

// Small arithmetic expression compiler used for custom weights, level sets
// and nonlinearities supplied through run configs.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "degen/error.hpp"

namespace degen {

class Expression {
public:
    Expression() = default;

    /// Compiles `text`; `variables` lists the names bound positionally at evaluation.
    static Expression compile(std::string_view text, std::vector<std::string> variables) {
        Parser parser{text, variables, 0};
        Expression out;
        out.text_ = std::string(text);
        out.root_ = parser.parse_expression();
        parser.skip_space();
        if (parser.pos != text.size())
            parser.fail("unexpected trailing input");
        out.arity_ = variables.size();
        return out;
    }

    double operator()(std::span<const double> values) const {
        if (!root_)
            throw Error(ErrorKind::parse, "evaluating an empty expression");
        return root_->eval(values);
    }

    const std::string& text() const noexcept { return text_; }
    std::size_t arity() const noexcept { return arity_; }
    bool empty() const noexcept { return root_ == nullptr; }

private:
    struct Node {
        enum class Op { constant, variable, add, sub, mul, div, pow, neg, call };
        Op op = Op::constant;
        double value = 0;
        std::size_t slot = 0;
        std::string fn;
        std::vector<std::shared_ptr<const Node>> args;

        double eval(std::span<const double> v) const {
            switch (op) {
            case Op::constant: return value;
            case Op::variable: return v[slot];
            case Op::add: return args[0]->eval(v) + args[1]->eval(v);
            case Op::sub: return args[0]->eval(v) - args[1]->eval(v);
            case Op::mul: return args[0]->eval(v) * args[1]->eval(v);
            case Op::div: return args[0]->eval(v) / args[1]->eval(v);
            case Op::pow: return std::pow(args[0]->eval(v), args[1]->eval(v));
            case Op::neg: return -args[0]->eval(v);
            case Op::call: return call(v);
            }
            return 0;
        }

        double call(std::span<const double> v) const {
            const double x = args[0]->eval(v);
            if (fn == "sqrt") return std::sqrt(x);
            if (fn == "cbrt") return std::cbrt(x);
            if (fn == "abs") return std::fabs(x);
            if (fn == "exp") return std::exp(x);
            if (fn == "log") return std::log(x);
            if (fn == "sin") return std::sin(x);
            if (fn == "cos") return std::cos(x);
            if (fn == "tan") return std::tan(x);
            if (fn == "tanh") return std::tanh(x);
            if (fn == "sign") return (x > 0) - (x < 0);
            const double y = args[1]->eval(v);
            if (fn == "pow") return std::pow(x, y);
            if (fn == "min") return std::fmin(x, y);
            if (fn == "max") return std::fmax(x, y);
            return std::nan("");
        }
    };
    using NodePtr = std::shared_ptr<const Node>;

    struct Parser {
        std::string_view text;
        const std::vector<std::string>& variables;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& msg) const {
            throw Error(ErrorKind::parse, "expression '" + std::string(text) + "': " + msg +
                                              " at offset " + std::to_string(pos));
        }

        void skip_space() {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
        }

        bool accept(char c) {
            skip_space();
            if (pos < text.size() && text[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        static NodePtr binary(typename Node::Op op, NodePtr a, NodePtr b) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->args = {std::move(a), std::move(b)};
            return n;
        }

        NodePtr parse_expression() {
            NodePtr lhs = parse_term();
            for (;;) {
                if (accept('+'))
                    lhs = binary(Node::Op::add, lhs, parse_term());
                else if (accept('-'))
                    lhs = binary(Node::Op::sub, lhs, parse_term());
                else
                    return lhs;
            }
        }

        NodePtr parse_term() {
            NodePtr lhs = parse_unary();
            for (;;) {
                if (accept('*'))
                    lhs = binary(Node::Op::mul, lhs, parse_unary());
                else if (accept('/'))
                    lhs = binary(Node::Op::div, lhs, parse_unary());
                else
                    return lhs;
            }
        }

        NodePtr parse_unary() {
            if (accept('-')) {
                auto n = std::make_shared<Node>();
                n->op = Node::Op::neg;
                n->args = {parse_unary()};
                return n;
            }
            if (accept('+'))
                return parse_unary();
            return parse_power();
        }

        NodePtr parse_power() {
            NodePtr base = parse_primary();
            if (accept('^'))
                return binary(Node::Op::pow, base, parse_unary());
            return base;
        }

        NodePtr parse_primary() {
            skip_space();
            if (pos >= text.size())
                fail("unexpected end of input");
            if (accept('(')) {
                NodePtr inner = parse_expression();
                if (!accept(')'))
                    fail("expected ')'");
                return inner;
            }
            const char c = text[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                return parse_name();
            fail(std::string("unexpected character '") + c + "'");
        }

        NodePtr parse_number() {
            const std::string tail(text.substr(pos));
            char* end = nullptr;
            const double v = std::strtod(tail.c_str(), &end);
            if (end == tail.c_str())
                fail("malformed number");
            pos += static_cast<std::size_t>(end - tail.c_str());
            auto n = std::make_shared<Node>();
            n->value = v;
            return n;
        }

        NodePtr parse_name() {
            const std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            const std::string name(text.substr(start, pos - start));

            if (accept('('))
                return parse_call(name);

            if (name == "pi") {
                auto n = std::make_shared<Node>();
                n->value = std::numbers::pi;
                return n;
            }
            for (std::size_t i = 0; i < variables.size(); ++i) {
                if (variables[i] == name) {
                    auto n = std::make_shared<Node>();
                    n->op = Node::Op::variable;
                    n->slot = i;
                    return n;
                }
            }
            // x, y, z alias x1, x2, x3
            static constexpr std::string_view aliases[] = {"x", "y", "z"};
            for (std::size_t k = 0; k < 3; ++k) {
                if (name != aliases[k])
                    continue;
                const std::string canonical = "x" + std::to_string(k + 1);
                for (std::size_t i = 0; i < variables.size(); ++i) {
                    if (variables[i] == canonical) {
                        auto n = std::make_shared<Node>();
                        n->op = Node::Op::variable;
                        n->slot = i;
                        return n;
                    }
                }
            }
            pos = start;
            fail("unknown name '" + name + "'");
        }

        NodePtr parse_call(const std::string& name) {
            static constexpr std::string_view unary[] = {"sqrt", "cbrt", "abs", "exp", "log",
                                                         "sin",  "cos",  "tan", "tanh", "sign"};
            static constexpr std::string_view binary_fns[] = {"pow", "min", "max"};
            std::size_t want = 0;
            for (auto u : unary)
                if (name == u) want = 1;
            for (auto b : binary_fns)
                if (name == b) want = 2;
            if (want == 0)
                fail("unknown function '" + name + "'");

            auto n = std::make_shared<Node>();
            n->op = Node::Op::call;
            n->fn = name;
            n->args.push_back(parse_expression());
            while (accept(','))
                n->args.push_back(parse_expression());
            if (!accept(')'))
                fail("expected ')' after arguments of " + name);
            if (n->args.size() != want)
                fail(name + " expects " + std::to_string(want) + " argument(s)");
            return n;
        }
    };

    std::string text_;
    NodePtr root_;
    std::size_t arity_ = 0;
};

/// Variable names x1..xN, followed by r = |x|.
inline std::vector<std::string> spatial_variables(std::size_t dimension) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < dimension; ++k)
        names.push_back("x" + std::to_string(k + 1));
    names.emplace_back("r");
    return names;
}

} // namespace degen
