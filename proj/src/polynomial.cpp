#include "chemoproof/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace chemoproof {

using namespace rounding;

Polynomial::Polynomial(std::vector<Enclosure> coeffs) : c(std::move(coeffs)) {}

Polynomial Polynomial::from_doubles(const std::vector<double>& coeffs) {
    return Polynomial(std::vector<Enclosure>(coeffs.begin(), coeffs.end()));
}

namespace {

struct Cursor {
    std::string_view s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char ch) {
        skip();
        if (i < s.size() && s[i] == ch) {
            ++i;
            return true;
        }
        return false;
    }
    [[nodiscard]] bool done() {
        skip();
        return i >= s.size();
    }
    [[nodiscard]] bool at_number() {
        skip();
        return i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.');
    }
    double number() {
        skip();
        double x = 0.0;
        const char* b = s.data() + i;
        const auto [p, ec] = std::from_chars(b, s.data() + s.size(), x);
        if (ec != std::errc()) fail("expected a number");
        i += static_cast<std::size_t>(p - b);
        return x;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("polynomial '" + std::string(s) + "': " + what + " at column " +
                                    std::to_string(i + 1));
    }
};

void add_term(std::vector<Enclosure>& c, std::size_t k, double a) {
    if (c.size() <= k) c.resize(k + 1, Enclosure(0.0));
    c[k] += Enclosure(a);
}

Polynomial parse_list(Cursor& cur) {
    const bool bracket = cur.eat('[');
    std::vector<Enclosure> c;
    do {
        double sign = 1.0;
        if (cur.eat('-')) sign = -1.0;
        else cur.eat('+');
        c.emplace_back(sign * cur.number());
    } while (cur.eat(','));
    if (bracket && !cur.eat(']')) cur.fail("expected ']'");
    if (!cur.done()) cur.fail("trailing input");
    return Polynomial(std::move(c));
}

// sum of terms  [+-] [coef [*]] [x [^ int]]
Polynomial parse_expression(Cursor& cur) {
    std::vector<Enclosure> c;
    bool first = true;
    while (!cur.done()) {
        double sign = 1.0;
        if (cur.eat('-')) sign = -1.0;
        else if (!cur.eat('+') && !first) cur.fail("expected '+' or '-'");
        first = false;

        double coef = 1.0;
        bool have_coef = false;
        if (cur.at_number()) {
            coef = cur.number();
            have_coef = true;
            cur.eat('*');
        }
        std::size_t power = 0;
        if (cur.eat('x')) {
            power = 1;
            if (cur.eat('^')) {
                const double p = cur.number();
                if (p < 0 || p != static_cast<double>(static_cast<std::size_t>(p))) cur.fail("bad exponent");
                power = static_cast<std::size_t>(p);
            }
        } else if (!have_coef) {
            cur.fail("expected a coefficient or 'x'");
        }
        add_term(c, power, sign * coef);
    }
    if (c.empty()) cur.fail("empty polynomial");
    return Polynomial(std::move(c));
}

}  // namespace

Polynomial Polynomial::parse(std::string_view text) {
    Cursor cur{text};
    if (cur.done()) cur.fail("empty polynomial");
    if (text.find(',') != std::string_view::npos || text.find('[') != std::string_view::npos) return parse_list(cur);
    return parse_expression(cur);
}

int Polynomial::degree() const {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
        if (!(c[static_cast<std::size_t>(k)] == Enclosure(0.0))) return k;
    }
    return -1;
}

Polynomial Polynomial::derivative() const {
    if (c.size() <= 1) return Polynomial({Enclosure(0.0)});
    std::vector<Enclosure> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = Enclosure(static_cast<double>(k)) * c[k];
    return Polynomial(std::move(d));
}

Enclosure Polynomial::operator()(const Enclosure& x) const {
    Enclosure acc(0.0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

double Polynomial::eval(double x) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k].mid();
    return acc;
}

double Polynomial::abs_eval_up(double r) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = add_up(mul_up(acc, r), sup_abs(c[k]));
    return acc;
}

double Polynomial::abs_derivative_up(double r) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) {
        acc = add_up(mul_up(acc, r), mul_up(static_cast<double>(k), sup_abs(c[k])));
    }
    return acc;
}

std::string Polynomial::to_string() const {
    std::ostringstream os;
    os.precision(17);
    bool any = false;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] == Enclosure(0.0)) continue;
        const double a = c[k].mid();
        if (any) os << (a < 0 ? " - " : " + ");
        else if (a < 0) os << '-';
        const double m = std::fabs(a);
        if (k == 0 || m != 1.0) os << m << (k > 0 ? "*" : "");
        if (k >= 1) os << 'x';
        if (k >= 2) os << '^' << k;
        any = true;
    }
    return any ? os.str() : "0";
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    std::vector<Enclosure> r(std::max(p.c.size(), q.c.size()), Enclosure(0.0));
    for (std::size_t k = 0; k < p.c.size(); ++k) r[k] += p.c[k];
    for (std::size_t k = 0; k < q.c.size(); ++k) r[k] += q.c[k];
    return Polynomial(std::move(r));
}

Polynomial operator-(const Polynomial& p, const Polynomial& q) { return p + Enclosure(-1.0) * q; }

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.c.empty() || q.c.empty()) return Polynomial({Enclosure(0.0)});
    std::vector<Enclosure> r(p.c.size() + q.c.size() - 1, Enclosure(0.0));
    for (std::size_t i = 0; i < p.c.size(); ++i) {
        for (std::size_t j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
    }
    return Polynomial(std::move(r));
}

Polynomial operator*(const Enclosure& a, const Polynomial& p) {
    Polynomial r = p;
    for (auto& e : r.c) e = a * e;
    return r;
}

GeoSeq apply(const Polynomial& p, const GeoSeq& v) {
    const int deg = std::max(p.degree(), 0);
    GeoSeq acc = GeoSeq::constant(v.geom, p.c.empty() ? Enclosure(0.0) : p.c[static_cast<std::size_t>(deg)]);
    for (int k = deg - 1; k >= 0; --k) {
        acc = conv(acc, v);
        acc[0] += p.c[static_cast<std::size_t>(k)];
    }
    return acc;
}

}  // namespace chemoproof
