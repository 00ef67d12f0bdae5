#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vlab {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p/q", "p", or a plain decimal such as "0.05" into an exact rational.
inline Rational parse_rational(std::string_view text)
{
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    if (auto dot = s.find('.'); dot != std::string::npos) {
        bool negative = s[0] == '-';
        std::string body = (negative || s[0] == '+') ? s.substr(1) : s;
        dot = body.find('.');
        std::string digits = body.substr(0, dot) + body.substr(dot + 1);
        std::size_t scale = body.size() - dot - 1;
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed decimal literal: " + s);
        Integer num(digits, 10);
        Integer den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, scale);
        Rational r(num, den);
        r.canonicalize();
        return negative ? Rational(-r) : r;
    }

    Rational r;
    if (r.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0)
        throw std::invalid_argument("malformed rational literal: " + s);
    if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    r.canonicalize();
    return r;
}

/// num/den in canonical form; GMP operations expect canonical operands.
inline Rational ratio(long num, long den)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }


inline Integer ceil_of(const Rational& r)
{
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

inline Integer binomial(unsigned long n, unsigned long k)
{
    Integer out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

inline Integer power(unsigned long base, unsigned long exp)
{
    Integer out;
    mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
    return out;
}

} // namespace vlab
