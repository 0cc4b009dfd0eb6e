#include "ellhom/arith.hpp"

#include <algorithm>
#include <cstring>

namespace ellhom {

int64 pow_mod(int64 base, BigInt exp, int64 m) {
    if (m == 1) return 0;
    int64 r = 1;
    int64 b = mod_reduce(base, m);
    while (exp > 0) {
        if ((exp & 1) != 0) r = mul_mod(r, b, m);
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    return r;
}

int64 gcd64(int64 a, int64 b) {
    while (b != 0) {
        int64 t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}

int64 inv_mod(int64 a, int64 m) {
    int64 t = 0, new_t = 1;
    int64 r = m, new_r = mod_reduce(a, m);
    while (new_r != 0) {
        int64 q = r / new_r;
        std::swap(t -= q * new_t, new_t);
        std::swap(r -= q * new_r, new_r);
    }
    if (r != 1) fail(ErrorCode::precondition, "inverse of a non-unit residue");
    return mod_reduce(t, m);
}

bool is_prime(int64 n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    for (int64 d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

int kronecker(BigInt a, BigInt n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    if (a % 2 == 0 && n % 2 == 0) return 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    // strip twos from n, using (a|2) = (2|a) rule
    int v = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++v;
    }
    if (v % 2 == 1) {
        BigInt am8 = ((a % 8) + 8) % 8;
        if (am8 == 3 || am8 == 5) result = -result;
    }
    a %= n;
    if (a < 0) a += n;
    while (a != 0) {
        v = 0;
        while (a % 2 == 0) {
            a /= 2;
            ++v;
        }
        if (v % 2 == 1) {
            BigInt nm8 = n % 8;
            if (nm8 == 3 || nm8 == 5) result = -result;
        }
        // quadratic reciprocity flip
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        BigInt t = n % a;
        n = a;
        a = t;
    }
    return n == 1 ? result : 0;
}

int64 crt_pair(int64 r1, int64 m1, int64 r2, int64 m2) {
    int64 d = inv_mod(m1 % m2, m2);
    int64 k = mul_mod(mod_reduce(r2 - r1, m2), d, m2);
    return r1 + m1 * k;
}

std::optional<int64> sqrt_mod_prime(int64 a, int64 p) {
    a = mod_reduce(a, p);
    if (a == 0) return 0;
    if (p == 2) return a;
    if (pow_mod(a, BigInt(p - 1) / 2, p) != 1) return std::nullopt;
    // Tonelli-Shanks
    int64 q = p - 1;
    int s = 0;
    while (q % 2 == 0) {
        q /= 2;
        ++s;
    }
    int64 z = 2;
    while (pow_mod(z, BigInt(p - 1) / 2, p) != p - 1) ++z;
    int64 m = s;
    int64 c = pow_mod(z, q, p);
    int64 t = pow_mod(a, q, p);
    int64 r = pow_mod(a, BigInt(q + 1) / 2, p);
    while (t != 1) {
        int64 i = 0;
        int64 tt = t;
        while (tt != 1) {
            tt = mul_mod(tt, tt, p);
            ++i;
        }
        int64 b = c;
        for (int64 j = 0; j < m - i - 1; ++j) b = mul_mod(b, b, p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    return std::min(r, p - r);
}

// ---------------------------------------------------------------------------
// raw polynomials over F_p (little-endian coefficient vectors), used for the
// irreducible-modulus scan before a FiniteField exists

namespace {

using RawPoly = std::vector<int64>;

void rp_trim(RawPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

RawPoly rp_mul(const RawPoly& a, const RawPoly& b, int64 p) {
    if (a.empty() || b.empty()) return {};
    RawPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + mul_mod(a[i], b[j], p)) % p;
    }
    rp_trim(r);
    return r;
}

// remainder modulo a monic polynomial
RawPoly rp_mod(RawPoly a, const RawPoly& f, int64 p) {
    rp_trim(a);
    size_t df = f.size() - 1;
    while (a.size() > df) {
        int64 lead = a.back();
        size_t shift = a.size() - 1 - df;
        if (lead != 0)
            for (size_t i = 0; i <= df; ++i)
                a[shift + i] = mod_reduce(a[shift + i] - mul_mod(lead, f[i], p), p);
        a.pop_back();
        rp_trim(a);
        if (a.size() <= df) break;
    }
    return a;
}

RawPoly rp_gcd(RawPoly a, RawPoly b, int64 p) {
    rp_trim(a);
    rp_trim(b);
    while (!b.empty()) {
        // reduce a mod b after making b monic
        int64 lead_inv = inv_mod(b.back(), p);
        RawPoly bm = b;
        for (auto& c : bm) c = mul_mod(c, lead_inv, p);
        RawPoly r = rp_mod(a, bm, p);
        a = b;
        b = r;
    }
    if (!a.empty()) {
        int64 li = inv_mod(a.back(), p);
        for (auto& c : a) c = mul_mod(c, li, p);
    }
    return a;
}

RawPoly rp_powmod(RawPoly base, BigInt e, const RawPoly& f, int64 p) {
    RawPoly r{1};
    base = rp_mod(std::move(base), f, p);
    while (e > 0) {
        if ((e & 1) != 0) r = rp_mod(rp_mul(r, base, p), f, p);
        base = rp_mod(rp_mul(base, base, p), f, p);
        e >>= 1;
    }
    return r;
}

// f monic of degree k >= 2 is irreducible over F_p iff it shares no factor
// with x^{p^i} - x for i up to k/2 (those split into all factors of degree
// dividing i).
bool rp_irreducible(const RawPoly& f, int64 p) {
    int k = static_cast<int>(f.size()) - 1;
    for (int i = 1; 2 * i <= k; ++i) {
        RawPoly xpi = rp_powmod({0, 1}, boost::multiprecision::pow(BigInt(p), i), f, p);
        // xpi - x
        if (xpi.size() < 2) xpi.resize(2, 0);
        xpi[1] = mod_reduce(xpi[1] - 1, p);
        rp_trim(xpi);
        RawPoly g = rp_gcd(f, xpi, p);
        if (g.size() != 1) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------

FiniteField::FiniteField(int64 p, int k, std::vector<int64> modulus)
    : p_(p), k_(k), modulus_(std::move(modulus)) {}

FiniteField FiniteField::prime(int64 p) {
    if (!is_prime(p)) fail(ErrorCode::precondition, "modulus is not prime");
    if (p <= 3) fail(ErrorCode::precondition, "p <= 3 rejected (short Weierstrass needs char > 3)");
    return FiniteField(p, 1, {0, 1});
}

FiniteField FiniteField::extension(int64 p, int k) {
    if (k < 1) fail(ErrorCode::precondition, "extension degree must be >= 1");
    if (!is_prime(p)) fail(ErrorCode::precondition, "modulus is not prime");
    if (p <= 3) fail(ErrorCode::precondition, "p <= 3 rejected (short Weierstrass needs char > 3)");
    if (k == 1) return prime(p);
    // smallest irreducible in the lexicographic coefficient order: candidates
    // x^k + c_{k-1}x^{k-1} + ... + c_0 enumerated by the base-p value of
    // (c_0, ..., c_{k-1})
    BigInt total = boost::multiprecision::pow(BigInt(p), k);
    for (BigInt code = 0; code < total; ++code) {
        std::vector<int64> f(k + 1, 0);
        BigInt c = code;
        for (int i = 0; i < k; ++i) {
            f[i] = static_cast<int64>(c % p);
            c /= p;
        }
        f[k] = 1;
        if (rp_irreducible(f, p)) return FiniteField(p, k, std::move(f));
    }
    fail(ErrorCode::internal, "no irreducible modulus found");  // unreachable
}

BigInt FiniteField::order() const { return boost::multiprecision::pow(BigInt(p_), k_); }

FieldElement FiniteField::one() const {
    FieldElement e(k_, 0);
    e[0] = 1;
    return e;
}

FieldElement FiniteField::from_int(int64 a) const {
    FieldElement e(k_, 0);
    e[0] = mod_reduce(a, p_);
    return e;
}

FieldElement FiniteField::gen() const {
    FieldElement e(k_, 0);
    if (k_ > 1) e[1] = 1;
    return e;
}

bool FiniteField::is_zero(const FieldElement& a) const {
    for (int64 c : a)
        if (c != 0) return false;
    return true;
}

FieldElement FiniteField::add(const FieldElement& a, const FieldElement& b) const {
    FieldElement r(k_);
    for (int i = 0; i < k_; ++i) {
        int64 s = a[i] + b[i];
        r[i] = s >= p_ ? s - p_ : s;
    }
    return r;
}

FieldElement FiniteField::sub(const FieldElement& a, const FieldElement& b) const {
    FieldElement r(k_);
    for (int i = 0; i < k_; ++i) {
        int64 s = a[i] - b[i];
        r[i] = s < 0 ? s + p_ : s;
    }
    return r;
}

FieldElement FiniteField::neg(const FieldElement& a) const {
    FieldElement r(k_);
    for (int i = 0; i < k_; ++i) r[i] = a[i] == 0 ? 0 : p_ - a[i];
    return r;
}

FieldElement FiniteField::mul(const FieldElement& a, const FieldElement& b) const {
    if (k_ == 1) return {mul_mod(a[0], b[0], p_)};
    std::vector<int64> prod(2 * k_ - 1, 0);
    for (int i = 0; i < k_; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < k_; ++j) prod[i + j] = (prod[i + j] + mul_mod(a[i], b[j], p_)) % p_;
    }
    // reduce by the monic modulus
    for (int d = 2 * k_ - 2; d >= k_; --d) {
        int64 lead = prod[d];
        if (lead == 0) continue;
        prod[d] = 0;
        for (int i = 0; i < k_; ++i)
            prod[d - k_ + i] = mod_reduce(prod[d - k_ + i] - mul_mod(lead, modulus_[i], p_), p_);
    }
    prod.resize(k_);
    return prod;
}

FieldElement FiniteField::inv(const FieldElement& a) const {
    if (is_zero(a)) fail(ErrorCode::precondition, "zero has no inverse");
    if (k_ == 1) return {inv_mod(a[0], p_)};
    // extended Euclid in F_p[x] against the modulus
    RawPoly r0 = modulus_, r1(a);
    rp_trim(r1);
    RawPoly t0{}, t1{1};
    while (!r1.empty()) {
        // divide r0 by r1
        int64 li = inv_mod(r1.back(), p_);
        RawPoly q;  // quotient (sparse use: apply directly)
        RawPoly rem = r0;
        rp_trim(rem);
        RawPoly tq = t0;
        while (rem.size() >= r1.size() && !rem.empty()) {
            int64 coef = mul_mod(rem.back(), li, p_);
            size_t shift = rem.size() - r1.size();
            if (q.size() < shift + 1) q.resize(shift + 1, 0);
            q[shift] = coef;
            for (size_t i = 0; i < r1.size(); ++i)
                rem[shift + i] = mod_reduce(rem[shift + i] - mul_mod(coef, r1[i], p_), p_);
            rp_trim(rem);
        }
        // t_next = t0 - q * t1
        RawPoly qt = rp_mul(q, t1, p_);
        RawPoly tn = t0;
        if (tn.size() < qt.size()) tn.resize(qt.size(), 0);
        for (size_t i = 0; i < qt.size(); ++i) tn[i] = mod_reduce(tn[i] - qt[i], p_);
        rp_trim(tn);
        t0 = t1;
        t1 = tn;
        r0 = r1;
        r1 = rem;
    }
    // r0 is a unit constant now
    if (r0.size() != 1) fail(ErrorCode::internal, "gcd with irreducible modulus not constant");
    int64 scale = inv_mod(r0[0], p_);
    FieldElement out(k_, 0);
    for (size_t i = 0; i < t0.size() && i < static_cast<size_t>(k_); ++i)
        out[i] = mul_mod(t0[i], scale, p_);
    return out;
}

FieldElement FiniteField::pow(const FieldElement& a, BigInt e) const {
    FieldElement base = a;
    if (e < 0) {
        base = inv(base);
        e = -e;
    }
    FieldElement r = one();
    while (e > 0) {
        if ((e & 1) != 0) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

FieldElement FiniteField::frobenius(const FieldElement& a) const {
    if (k_ == 1) return a;
    return pow(a, p_);
}

bool FiniteField::is_square(const FieldElement& a) const {
    if (is_zero(a)) return true;
    FieldElement t = pow(a, (order() - 1) / 2);
    return eq(t, one());
}

std::optional<FieldElement> FiniteField::sqrt(const FieldElement& a) const {
    if (is_zero(a)) return zero();
    BigInt q = order();
    if (!is_square(a)) return std::nullopt;
    BigInt t = q - 1;
    int s = 0;
    while (t % 2 == 0) {
        t /= 2;
        ++s;
    }
    // deterministic non-residue: constants first, then shifted generators
    FieldElement z = zero();
    for (int64 c = 2;; ++c) {
        FieldElement cand = c < p_ ? from_int(c) : add(gen(), from_int(c - p_));
        if (!is_zero(cand) && !is_square(cand)) {
            z = cand;
            break;
        }
        if (c > p_ + 64) fail(ErrorCode::internal, "no quadratic non-residue found");
    }
    int m = s;
    FieldElement c = pow(z, t);
    FieldElement u = pow(a, t);
    FieldElement r = pow(a, (t + 1) / 2);
    while (!eq(u, one())) {
        int i = 0;
        FieldElement uu = u;
        while (!eq(uu, one())) {
            uu = mul(uu, uu);
            ++i;
        }
        FieldElement b = c;
        for (int j = 0; j < m - i - 1; ++j) b = mul(b, b);
        m = i;
        c = mul(b, b);
        u = mul(u, c);
        r = mul(r, b);
    }
    FieldElement rn = neg(r);
    return key(r) <= key(rn) ? r : rn;
}

bool FiniteField::in_prime_field(const FieldElement& a) const {
    for (int i = 1; i < k_; ++i)
        if (a[i] != 0) return false;
    return true;
}

int64 FiniteField::to_int(const FieldElement& a) const {
    if (!in_prime_field(a)) fail(ErrorCode::internal, "element not in the prime field");
    return a[0];
}

FieldElement FiniteField::element_from_code(BigInt code) const {
    FieldElement e(k_, 0);
    for (int i = 0; i < k_ && code != 0; ++i) {
        e[i] = static_cast<int64>(code % p_);
        code /= p_;
    }
    return e;
}

std::string FiniteField::key(const FieldElement& a) const {
    std::string s(a.size() * sizeof(int64), '\0');
    std::memcpy(s.data(), a.data(), s.size());
    return s;
}

}  // namespace ellhom
