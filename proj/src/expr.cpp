#include "tilt/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace tilt {

namespace {

ExprPtr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

double ipow(double base, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= base;
    return r;
}

std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

ExprPtr make_const(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("make_const: non-finite constant");
    return node({Op::Const, v, 0, 0, nullptr, nullptr});
}
ExprPtr make_var(std::size_t index) { return node({Op::Var, 0.0, index, 0, nullptr, nullptr}); }
ExprPtr make_add(ExprPtr a, ExprPtr b) { return node({Op::Add, 0.0, 0, 0, std::move(a), std::move(b)}); }
ExprPtr make_sub(ExprPtr a, ExprPtr b) { return node({Op::Sub, 0.0, 0, 0, std::move(a), std::move(b)}); }
ExprPtr make_mul(ExprPtr a, ExprPtr b) { return node({Op::Mul, 0.0, 0, 0, std::move(a), std::move(b)}); }
ExprPtr make_div(ExprPtr a, ExprPtr b) { return node({Op::Div, 0.0, 0, 0, std::move(a), std::move(b)}); }
ExprPtr make_neg(ExprPtr a) { return node({Op::Neg, 0.0, 0, 0, std::move(a), nullptr}); }
ExprPtr make_pow(ExprPtr a, int exponent) {
    if (exponent < 0) throw std::invalid_argument("make_pow: exponent must be >= 0");
    return node({Op::Pow, 0.0, 0, exponent, std::move(a), nullptr});
}
ExprPtr make_sqrt(ExprPtr a) { return node({Op::Sqrt, 0.0, 0, 0, std::move(a), nullptr}); }
ExprPtr make_relu3(ExprPtr a) { return node({Op::Relu3, 0.0, 0, 0, std::move(a), nullptr}); }

ParseError::ParseError(const std::string& message, int line_, int column_)
    : std::runtime_error("line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ": " + message),
      line(line_),
      column(column_) {}

// ---------------------------------------------------------------------------
// Expression parsing

namespace {

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    double number = 0.0;
    bool plainInt = false;  // lexeme is digits only, usable as an exponent
    int column = 1;
};

class Lexer {
public:
    Lexer(const std::string& src, int line) : src_(src), line_(line) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t i = 0;
        while (i < src_.size()) {
            const char c = src_[i];
            if (c == ' ' || c == '\t') {
                ++i;
                continue;
            }
            const int col = static_cast<int>(i) + 1;
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back(lex_number(i, col));
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                    ++j;
                out.push_back({Tok::Ident, src_.substr(i, j - i), 0.0, false, col});
                i = j;
                continue;
            }
            Tok kind;
            switch (c) {
                case '+': kind = Tok::Plus; break;
                case '-': kind = Tok::Minus; break;
                case '*': kind = Tok::Star; break;
                case '/': kind = Tok::Slash; break;
                case '^': kind = Tok::Caret; break;
                case '(': kind = Tok::LParen; break;
                case ')': kind = Tok::RParen; break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", line_, col);
            }
            out.push_back({kind, std::string(1, c), 0.0, false, col});
            ++i;
        }
        out.push_back({Tok::End, "", 0.0, false, static_cast<int>(src_.size()) + 1});
        return out;
    }

private:
    Token lex_number(std::size_t& i, int col) {
        const std::size_t start = i;
        bool sawDigit = false;
        while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) {
            ++i;
            sawDigit = true;
        }
        bool plainInt = sawDigit;
        if (i < src_.size() && src_[i] == '.') {
            plainInt = false;
            ++i;
            while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) {
                ++i;
                sawDigit = true;
            }
        }
        if (!sawDigit) throw ParseError("malformed number", line_, col);
        if (i < src_.size() && (src_[i] == 'e' || src_[i] == 'E')) {
            plainInt = false;
            std::size_t j = i + 1;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
            if (j >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[j])))
                throw ParseError("malformed exponent", line_, col);
            while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
            i = j;
        }
        const std::string lexeme = src_.substr(start, i - start);
        double value = 0.0;
        const auto res = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
        if (res.ec != std::errc{} || res.ptr != lexeme.data() + lexeme.size())
            throw ParseError("malformed number '" + lexeme + "'", line_, col);
        return {Tok::Num, lexeme, value, plainInt, col};
    }

    const std::string& src_;
    int line_;
};

class ExprParser {
public:
    ExprParser(std::vector<Token> tokens, std::size_t dimension,
               const std::map<std::string, double>& params, int line)
        : tokens_(std::move(tokens)), dimension_(dimension), params_(params), line_(line) {}

    ExprPtr run() {
        ExprPtr e = parse_sum();
        expect(Tok::End, "unexpected trailing input");
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token take() { return tokens_[pos_++]; }

    void expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) throw ParseError(what, line_, peek().column);
        ++pos_;
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const bool plus = take().kind == Tok::Plus;
            ExprPtr rhs = parse_term();
            e = plus ? make_add(e, rhs) : make_sub(e, rhs);
        }
        return e;
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const bool mul = take().kind == Tok::Star;
            ExprPtr rhs = parse_unary();
            e = mul ? make_mul(e, rhs) : make_div(e, rhs);
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (peek().kind == Tok::Minus) {
            take();
            return make_neg(parse_unary());
        }
        if (peek().kind == Tok::Plus) {
            take();
            return parse_unary();
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (peek().kind != Tok::Caret) return base;
        take();
        const Token exp = peek();
        if (exp.kind != Tok::Num || !exp.plainInt)
            throw ParseError("exponent must be a nonnegative integer literal", line_, exp.column);
        take();
        if (exp.number > 999.0)
            throw ParseError("exponent too large (max 999)", line_, exp.column);
        return make_pow(base, static_cast<int>(exp.number));
    }

    ExprPtr parse_atom() {
        const Token t = peek();
        switch (t.kind) {
            case Tok::Num:
                take();
                return make_const(t.number);
            case Tok::LParen: {
                take();
                ExprPtr e = parse_sum();
                expect(Tok::RParen, "expected ')'");
                return e;
            }
            case Tok::Ident:
                take();
                return resolve_identifier(t);
            default:
                throw ParseError("expected a number, variable, or '('", line_, t.column);
        }
    }

    ExprPtr resolve_identifier(const Token& t) {
        if (t.text == "sqrt" || t.text == "relu3") {
            expect(Tok::LParen, "expected '(' after '" + t.text + "'");
            ExprPtr arg = parse_sum();
            expect(Tok::RParen, "expected ')'");
            return t.text == "sqrt" ? make_sqrt(arg) : make_relu3(arg);
        }
        if (t.text.size() >= 2 && t.text[0] == 'x' && t.text[1] != '0' &&
            std::all_of(t.text.begin() + 1, t.text.end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            const std::size_t index = std::stoull(t.text.substr(1));
            if (index > dimension_)
                throw ParseError("variable " + t.text + " out of range for dimension " +
                                     std::to_string(dimension_),
                                 line_, t.column);
            return make_var(index - 1);
        }
        const auto it = params_.find(t.text);
        if (it != params_.end()) return make_const(it->second);
        throw ParseError("unknown identifier '" + t.text + "'", line_, t.column);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t dimension_;
    const std::map<std::string, double>& params_;
    int line_;
};

}  // namespace

ExprPtr parse_expression(const std::string& src, std::size_t dimension,
                         const std::map<std::string, double>& params, int line) {
    return ExprParser(Lexer(src, line).run(), dimension, params, line).run();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels: sum 1, product 2, unary 3, power 4, atom 5.
int precedence(const ExprNode& e) {
    switch (e.op) {
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        case Op::Const: return e.constant < 0.0 ? 3 : 5;
        default: return 5;
    }
}

void print_rec(const ExprPtr& e, std::string& out);

void print_child(const ExprPtr& child, int minPrec, std::string& out) {
    if (precedence(*child) < minPrec) {
        out += '(';
        print_rec(child, out);
        out += ')';
    } else {
        print_rec(child, out);
    }
}

void print_rec(const ExprPtr& e, std::string& out) {
    switch (e->op) {
        case Op::Const:
            out += fmt_double(e->constant);
            break;
        case Op::Var:
            out += 'x';
            out += std::to_string(e->var + 1);
            break;
        // Right operands of +,-,*,/ are parenthesized one level tighter than
        // usual so the reparse rebuilds the identical association and the
        // round trip is evaluation-exact, not merely algebraically equal.
        case Op::Add:
            print_child(e->a, 1, out);
            out += " + ";
            print_child(e->b, 2, out);
            break;
        case Op::Sub:
            print_child(e->a, 1, out);
            out += " - ";
            print_child(e->b, 2, out);
            break;
        case Op::Mul:
            print_child(e->a, 2, out);
            out += "*";
            print_child(e->b, 3, out);
            break;
        case Op::Div:
            print_child(e->a, 2, out);
            out += "/";
            print_child(e->b, 3, out);
            break;
        case Op::Neg:
            out += '-';
            print_child(e->a, 3, out);
            break;
        case Op::Pow:
            print_child(e->a, 5, out);
            out += '^';
            out += std::to_string(e->exponent);
            break;
        case Op::Sqrt:
            out += "sqrt(";
            print_rec(e->a, out);
            out += ')';
            break;
        case Op::Relu3:
            out += "relu3(";
            print_rec(e->a, out);
            out += ')';
            break;
    }
}

}  // namespace

std::string print_expression(const ExprPtr& e) {
    std::string out;
    print_rec(e, out);
    return out;
}

ExprPtr substitute(const ExprPtr& e, const std::vector<ExprPtr>& replacement) {
    std::unordered_map<const ExprNode*, ExprPtr> memo;
    const std::function<ExprPtr(const ExprPtr&)> rec = [&](const ExprPtr& cur) -> ExprPtr {
        const auto it = memo.find(cur.get());
        if (it != memo.end()) return it->second;
        ExprPtr result;
        switch (cur->op) {
            case Op::Const:
                result = cur;
                break;
            case Op::Var:
                if (cur->var >= replacement.size())
                    throw std::invalid_argument("substitute: missing replacement for variable");
                result = replacement[cur->var];
                break;
            case Op::Add: result = make_add(rec(cur->a), rec(cur->b)); break;
            case Op::Sub: result = make_sub(rec(cur->a), rec(cur->b)); break;
            case Op::Mul: result = make_mul(rec(cur->a), rec(cur->b)); break;
            case Op::Div: result = make_div(rec(cur->a), rec(cur->b)); break;
            case Op::Neg: result = make_neg(rec(cur->a)); break;
            case Op::Pow: result = make_pow(rec(cur->a), cur->exponent); break;
            case Op::Sqrt: result = make_sqrt(rec(cur->a)); break;
            case Op::Relu3: result = make_relu3(rec(cur->a)); break;
        }
        memo.emplace(cur.get(), result);
        return result;
    };
    return rec(e);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_value_rec(const ExprPtr& e, const Vec& x,
                      std::unordered_map<const ExprNode*, double>& memo) {
    const auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    double v = 0.0;
    switch (e->op) {
        case Op::Const: v = e->constant; break;
        case Op::Var:
            if (e->var >= x.size()) throw DomainError("variable index out of range");
            v = x[e->var];
            break;
        case Op::Add: v = eval_value_rec(e->a, x, memo) + eval_value_rec(e->b, x, memo); break;
        case Op::Sub: v = eval_value_rec(e->a, x, memo) - eval_value_rec(e->b, x, memo); break;
        case Op::Mul: v = eval_value_rec(e->a, x, memo) * eval_value_rec(e->b, x, memo); break;
        case Op::Div: {
            const double den = eval_value_rec(e->b, x, memo);
            if (den == 0.0) throw DomainError("division by zero");
            v = eval_value_rec(e->a, x, memo) / den;
            break;
        }
        case Op::Neg: v = -eval_value_rec(e->a, x, memo); break;
        case Op::Pow: v = ipow(eval_value_rec(e->a, x, memo), e->exponent); break;
        case Op::Sqrt: {
            const double u = eval_value_rec(e->a, x, memo);
            if (u < 0.0) throw DomainError("sqrt of a negative value");
            v = std::sqrt(u);
            break;
        }
        case Op::Relu3: {
            const double t = eval_value_rec(e->a, x, memo);
            v = t > 0.0 ? t * t * t : 0.0;
            break;
        }
    }
    memo.emplace(e.get(), v);
    return v;
}

struct Taylor1Ctx {
    const Vec& x;
    std::unordered_map<const ExprNode*, Taylor1> memo;

    const Taylor1& eval(const ExprPtr& e) {
        const auto it = memo.find(e.get());
        if (it != memo.end()) return it->second;
        const std::size_t n = x.size();
        Taylor1 r;
        r.gradient.assign(n, 0.0);
        switch (e->op) {
            case Op::Const:
                r.value = e->constant;
                break;
            case Op::Var:
                if (e->var >= n) throw DomainError("variable index out of range");
                r.value = x[e->var];
                r.gradient[e->var] = 1.0;
                break;
            case Op::Add: {
                const Taylor1 a = eval(e->a);
                const Taylor1& b = eval(e->b);
                r.value = a.value + b.value;
                for (std::size_t i = 0; i < n; ++i) r.gradient[i] = a.gradient[i] + b.gradient[i];
                break;
            }
            case Op::Sub: {
                const Taylor1 a = eval(e->a);
                const Taylor1& b = eval(e->b);
                r.value = a.value - b.value;
                for (std::size_t i = 0; i < n; ++i) r.gradient[i] = a.gradient[i] - b.gradient[i];
                break;
            }
            case Op::Mul: {
                const Taylor1 a = eval(e->a);
                const Taylor1& b = eval(e->b);
                r.value = a.value * b.value;
                for (std::size_t i = 0; i < n; ++i)
                    r.gradient[i] = a.value * b.gradient[i] + b.value * a.gradient[i];
                break;
            }
            case Op::Div: {
                const Taylor1 a = eval(e->a);
                const Taylor1& b = eval(e->b);
                if (b.value == 0.0) throw DomainError("division by zero");
                r.value = a.value / b.value;
                for (std::size_t i = 0; i < n; ++i)
                    r.gradient[i] = (a.gradient[i] - r.value * b.gradient[i]) / b.value;
                break;
            }
            case Op::Neg: {
                const Taylor1& a = eval(e->a);
                r.value = -a.value;
                for (std::size_t i = 0; i < n; ++i) r.gradient[i] = -a.gradient[i];
                break;
            }
            case Op::Pow: {
                const Taylor1& a = eval(e->a);
                const int k = e->exponent;
                r.value = ipow(a.value, k);
                if (k >= 1) {
                    const double scale = k * ipow(a.value, k - 1);
                    for (std::size_t i = 0; i < n; ++i) r.gradient[i] = scale * a.gradient[i];
                }
                break;
            }
            case Op::Sqrt: {
                const Taylor1& a = eval(e->a);
                if (a.value < 0.0) throw DomainError("sqrt of a negative value");
                r.value = std::sqrt(a.value);
                for (std::size_t i = 0; i < n; ++i) r.gradient[i] = a.gradient[i] / (2.0 * r.value);
                break;
            }
            case Op::Relu3: {
                const Taylor1& a = eval(e->a);
                if (a.value > 0.0) {
                    r.value = a.value * a.value * a.value;
                    const double scale = 3.0 * a.value * a.value;
                    for (std::size_t i = 0; i < n; ++i) r.gradient[i] = scale * a.gradient[i];
                }
                break;
            }
        }
        return memo.emplace(e.get(), std::move(r)).first->second;
    }
};

struct Taylor2Ctx {
    const Vec& x;
    std::unordered_map<const ExprNode*, Taylor2> memo;

    const Taylor2& eval(const ExprPtr& e) {
        const auto it = memo.find(e.get());
        if (it != memo.end()) return it->second;
        const std::size_t n = x.size();
        Taylor2 r;
        r.gradient.assign(n, 0.0);
        r.hessian = Mat(n, n);
        switch (e->op) {
            case Op::Const:
                r.value = e->constant;
                break;
            case Op::Var:
                if (e->var >= n) throw DomainError("variable index out of range");
                r.value = x[e->var];
                r.gradient[e->var] = 1.0;
                break;
            case Op::Add: {
                const Taylor2 a = eval(e->a);
                const Taylor2& b = eval(e->b);
                r.value = a.value + b.value;
                for (std::size_t i = 0; i < n; ++i) {
                    r.gradient[i] = a.gradient[i] + b.gradient[i];
                    for (std::size_t j = 0; j < n; ++j)
                        r.hessian(i, j) = a.hessian(i, j) + b.hessian(i, j);
                }
                break;
            }
            case Op::Sub: {
                const Taylor2 a = eval(e->a);
                const Taylor2& b = eval(e->b);
                r.value = a.value - b.value;
                for (std::size_t i = 0; i < n; ++i) {
                    r.gradient[i] = a.gradient[i] - b.gradient[i];
                    for (std::size_t j = 0; j < n; ++j)
                        r.hessian(i, j) = a.hessian(i, j) - b.hessian(i, j);
                }
                break;
            }
            case Op::Mul: {
                const Taylor2 a = eval(e->a);
                const Taylor2& b = eval(e->b);
                r.value = a.value * b.value;
                for (std::size_t i = 0; i < n; ++i)
                    r.gradient[i] = a.value * b.gradient[i] + b.value * a.gradient[i];
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        r.hessian(i, j) = a.value * b.hessian(i, j) + b.value * a.hessian(i, j) +
                                          a.gradient[i] * b.gradient[j] +
                                          b.gradient[i] * a.gradient[j];
                break;
            }
            case Op::Div: {
                const Taylor2 a = eval(e->a);
                const Taylor2& b = eval(e->b);
                if (b.value == 0.0) throw DomainError("division by zero");
                r.value = a.value / b.value;
                for (std::size_t i = 0; i < n; ++i)
                    r.gradient[i] = (a.gradient[i] - r.value * b.gradient[i]) / b.value;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        r.hessian(i, j) =
                            (a.hessian(i, j) - r.value * b.hessian(i, j) -
                             r.gradient[i] * b.gradient[j] - b.gradient[i] * r.gradient[j]) /
                            b.value;
                break;
            }
            case Op::Neg: {
                const Taylor2& a = eval(e->a);
                r.value = -a.value;
                for (std::size_t i = 0; i < n; ++i) {
                    r.gradient[i] = -a.gradient[i];
                    for (std::size_t j = 0; j < n; ++j) r.hessian(i, j) = -a.hessian(i, j);
                }
                break;
            }
            case Op::Pow: {
                const Taylor2& a = eval(e->a);
                const int k = e->exponent;
                r.value = ipow(a.value, k);
                if (k >= 1) {
                    const double gs = k * ipow(a.value, k - 1);
                    const double hs = k >= 2 ? k * (k - 1.0) * ipow(a.value, k - 2) : 0.0;
                    for (std::size_t i = 0; i < n; ++i) r.gradient[i] = gs * a.gradient[i];
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            r.hessian(i, j) =
                                gs * a.hessian(i, j) + hs * a.gradient[i] * a.gradient[j];
                }
                break;
            }
            case Op::Sqrt: {
                const Taylor2& a = eval(e->a);
                if (a.value < 0.0) throw DomainError("sqrt of a negative value");
                r.value = std::sqrt(a.value);
                const double inv = 1.0 / (2.0 * r.value);
                for (std::size_t i = 0; i < n; ++i) r.gradient[i] = inv * a.gradient[i];
                const double inv3 = 0.25 / (r.value * r.value * r.value);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        r.hessian(i, j) =
                            inv * a.hessian(i, j) - inv3 * a.gradient[i] * a.gradient[j];
                break;
            }
            case Op::Relu3: {
                // max(t,0)^3 is C^2; at t <= 0 the whole 2-jet vanishes, so
                // child derivatives are dropped unseen (this also masks the
                // infinite sqrt jet at the center of a distance term).
                const Taylor2& a = eval(e->a);
                if (a.value > 0.0) {
                    r.value = a.value * a.value * a.value;
                    const double gs = 3.0 * a.value * a.value;
                    const double hs = 6.0 * a.value;
                    for (std::size_t i = 0; i < n; ++i) r.gradient[i] = gs * a.gradient[i];
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            r.hessian(i, j) =
                                gs * a.hessian(i, j) + hs * a.gradient[i] * a.gradient[j];
                }
                break;
            }
        }
        return memo.emplace(e.get(), std::move(r)).first->second;
    }
};

}  // namespace

double eval_value(const ExprPtr& e, const Vec& x) {
    std::unordered_map<const ExprNode*, double> memo;
    return eval_value_rec(e, x, memo);
}

Taylor1 eval_taylor1(const ExprPtr& e, const Vec& x) {
    Taylor1Ctx ctx{x, {}};
    return ctx.eval(e);
}

Taylor2 eval_taylor(const ExprPtr& e, const Vec& x) {
    Taylor2Ctx ctx{x, {}};
    return ctx.eval(e);
}

// ---------------------------------------------------------------------------
// Problem files

namespace {

struct Statement {
    std::string key;
    std::string value;
    int line = 0;
};

std::string strip_comment(const std::string& line) {
    bool inQuote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') inQuote = !inQuote;
        else if (line[i] == '#' && !inQuote) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool brackets_balanced(const std::string& s) {
    long depth = 0;
    bool inQuote = false;
    for (char c : s) {
        if (c == '"') inQuote = !inQuote;
        else if (!inQuote && c == '[') ++depth;
        else if (!inQuote && c == ']') --depth;
    }
    return depth <= 0;
}

std::vector<Statement> split_statements(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);

    std::vector<Statement> out;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string body = trim(strip_comment(lines[li]));
        if (body.empty()) continue;
        const int startLine = static_cast<int>(li) + 1;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", startLine, 1);
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        while (!brackets_balanced(value)) {
            if (li + 1 >= lines.size())
                throw ParseError("unterminated '[' in value for '" + key + "'", startLine, 1);
            ++li;
            value += ' ';
            value += trim(strip_comment(lines[li]));
        }
        if (key.empty()) throw ParseError("missing key before '='", startLine, 1);
        out.push_back({key, trim(value), startLine});
    }
    return out;
}

double parse_real(const std::string& s, int line) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw ParseError("expected a real number, got '" + t + "'", line, 1);
    return v;
}

std::string parse_quoted(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t.size() < 2 || t.front() != '"' || t.back() != '"')
        throw ParseError("expected a double-quoted string", line, 1);
    return t.substr(1, t.size() - 2);
}

// Splits "[a, b, c]" at top-level commas; empty brackets give an empty list.
std::vector<std::string> parse_array(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw ParseError("expected '[...]'", line, 1);
    const std::string inner = trim(t.substr(1, t.size() - 2));
    std::vector<std::string> items;
    if (inner.empty()) return items;
    std::string cur;
    bool inQuote = false;
    for (char c : inner) {
        if (c == '"') inQuote = !inQuote;
        if (c == ',' && !inQuote) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    items.push_back(trim(cur));
    return items;
}

bool looks_like_variable(const std::string& name) {
    return name.size() >= 2 && name[0] == 'x' && name[1] != '0' &&
           std::all_of(name.begin() + 1, name.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

ProblemSpec parse_problem(const std::string& text,
                          const std::map<std::string, double>& paramOverrides) {
    const std::vector<Statement> statements = split_statements(text);

    const Statement* dimensionStmt = nullptr;
    const Statement* objectiveStmt = nullptr;
    const Statement* equalitiesStmt = nullptr;
    const Statement* inequalitiesStmt = nullptr;
    const Statement* pointStmt = nullptr;
    ProblemSpec p;

    const auto claim = [](const Statement*& slot, const Statement& s) {
        if (slot) throw ParseError("duplicate key '" + s.key + "'", s.line, 1);
        slot = &s;
    };

    for (const Statement& s : statements) {
        if (s.key == "dimension") claim(dimensionStmt, s);
        else if (s.key == "objective") claim(objectiveStmt, s);
        else if (s.key == "equalities") claim(equalitiesStmt, s);
        else if (s.key == "inequalities") claim(inequalitiesStmt, s);
        else if (s.key == "point") claim(pointStmt, s);
        else if (s.key.rfind("params.", 0) == 0) {
            const std::string name = s.key.substr(7);
            if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') ||
                !std::all_of(name.begin(), name.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
                }))
                throw ParseError("bad parameter name '" + name + "'", s.line, 1);
            if (name == "sqrt" || name == "relu3" || looks_like_variable(name))
                throw ParseError("parameter name '" + name + "' collides with a builtin", s.line, 1);
            if (p.params.count(name))
                throw ParseError("duplicate parameter '" + name + "'", s.line, 1);
            p.params[name] = parse_real(s.value, s.line);
        } else {
            throw ParseError("unknown key '" + s.key + "'", s.line, 1);
        }
    }

    for (const auto& [k, v] : paramOverrides) {
        if (!p.params.count(k))
            throw ParseError("override names undeclared parameter '" + k + "'", 0, 0);
        p.params[k] = v;
    }

    if (!dimensionStmt) throw ParseError("missing 'dimension'", 0, 0);
    const double dimReal = parse_real(dimensionStmt->value, dimensionStmt->line);
    if (dimReal < 1.0 || dimReal != std::floor(dimReal) || dimReal > 64.0)
        throw ParseError("dimension must be an integer in [1, 64]", dimensionStmt->line, 1);
    p.dimension = static_cast<std::size_t>(dimReal);

    if (!objectiveStmt) throw ParseError("missing 'objective'", 0, 0);
    p.objective = parse_expression(parse_quoted(objectiveStmt->value, objectiveStmt->line),
                                   p.dimension, p.params, objectiveStmt->line);

    const auto parse_constraints = [&](const Statement* stmt) {
        std::vector<ExprPtr> out;
        if (!stmt) return out;
        for (const std::string& item : parse_array(stmt->value, stmt->line))
            out.push_back(parse_expression(parse_quoted(item, stmt->line), p.dimension, p.params,
                                           stmt->line));
        return out;
    };
    p.equalities = parse_constraints(equalitiesStmt);
    p.inequalities = parse_constraints(inequalitiesStmt);

    if (!pointStmt) throw ParseError("missing 'point'", 0, 0);
    for (const std::string& item : parse_array(pointStmt->value, pointStmt->line))
        p.point.push_back(parse_real(item, pointStmt->line));
    if (p.point.size() != p.dimension)
        throw ParseError("point has " + std::to_string(p.point.size()) +
                             " entries but dimension is " + std::to_string(p.dimension),
                         pointStmt->line, 1);

    return p;
}

std::string print_problem(const ProblemSpec& p) {
    std::ostringstream out;
    out << "dimension = " << p.dimension << "\n";
    for (const auto& [k, v] : p.params) out << "params." << k << " = " << fmt_double(v) << "\n";
    out << "objective = \"" << print_expression(p.objective) << "\"\n";
    const auto emit_list = [&](const char* key, const std::vector<ExprPtr>& items) {
        out << key << " = [";
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out << ", ";
            out << '"' << print_expression(items[i]) << '"';
        }
        out << "]\n";
    };
    emit_list("equalities", p.equalities);
    emit_list("inequalities", p.inequalities);
    out << "point = [";
    for (std::size_t i = 0; i < p.point.size(); ++i) {
        if (i) out << ", ";
        out << fmt_double(p.point[i]);
    }
    out << "]\n";
    return out.str();
}

namespace {

ConstraintData to_constraint_data(const Taylor2& t) { return {t.value, t.gradient, t.hessian}; }

void check_finite(const Taylor2& t, const std::string& context) {
    bool ok = std::isfinite(t.value);
    for (double g : t.gradient) ok = ok && std::isfinite(g);
    for (std::size_t i = 0; ok && i < t.hessian.rows(); ++i)
        for (std::size_t j = 0; j < t.hessian.cols(); ++j) ok = ok && std::isfinite(t.hessian(i, j));
    if (!ok) throw DomainError(context + ": non-finite derivative values at this point");
}

Taylor2 eval_piece(const ExprPtr& e, const Vec& x, const std::string& context) {
    Taylor2 t;
    try {
        t = eval_taylor(e, x);
    } catch (const DomainError& err) {
        throw DomainError(context + ": " + err.what());
    }
    check_finite(t, context);
    for (std::size_t i = 0; i < t.hessian.rows(); ++i)
        for (std::size_t j = i + 1; j < t.hessian.cols(); ++j) {
            const double v = 0.5 * (t.hessian(i, j) + t.hessian(j, i));
            t.hessian(i, j) = t.hessian(j, i) = v;
        }
    return t;
}

}  // namespace

PointData eval_point(const ProblemSpec& p, const Vec& x) {
    if (x.size() != p.dimension)
        throw std::invalid_argument("eval_point: point length does not match dimension");
    PointData pd;
    pd.x = x;
    const Taylor2 obj = eval_piece(p.objective, x, "objective");
    pd.objectiveValue = obj.value;
    pd.objectiveGradient = obj.gradient;
    pd.objectiveHessian = obj.hessian;
    for (std::size_t i = 0; i < p.equalities.size(); ++i)
        pd.equalities.push_back(to_constraint_data(
            eval_piece(p.equalities[i], x, "equality " + std::to_string(i + 1))));
    for (std::size_t i = 0; i < p.inequalities.size(); ++i)
        pd.inequalities.push_back(to_constraint_data(
            eval_piece(p.inequalities[i], x, "inequality " + std::to_string(i + 1))));
    return pd;
}

}  // namespace tilt
