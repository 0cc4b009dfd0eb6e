#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ellhom {

using int64 = std::int64_t;
using BigInt = boost::multiprecision::cpp_int;

// Error codes double as process exit codes in the CLI.
enum class ErrorCode : int {
    precondition = 2,
    cap_exceeded = 3,
    not_found = 4,
    internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline int64 mod_reduce(int64 a, int64 m) {
    int64 r = a % m;
    return r < 0 ? r + m : r;
}

inline int64 mul_mod(int64 a, int64 b, int64 m) {
    return static_cast<int64>(static_cast<__int128>(a) * b % m);
}

int64 pow_mod(int64 base, BigInt exp, int64 m);
int64 inv_mod(int64 a, int64 m);  // gcd(a, m) = 1 required

// Deterministic trial-division primality test.
bool is_prime(int64 n);

// Kronecker symbol (a|n), n may be even or negative.
int kronecker(BigInt a, BigInt n);

int64 gcd64(int64 a, int64 b);

// x with x = r1 mod m1, x = r2 mod m2 for coprime moduli.
int64 crt_pair(int64 r1, int64 m1, int64 r2, int64 m2);

// Deterministic stream used wherever "random" field elements are needed.
// A fixed seed keeps torsion bases and certificates bit-stable across runs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    int64 below(int64 bound) { return static_cast<int64>(next() % static_cast<std::uint64_t>(bound)); }

private:
    std::uint64_t state_;
};

// An element of F_{p^k}: polynomial residue of degree < k, coefficients in [0, p).
// Always kept at size k so equality is plain vector equality.
using FieldElement = std::vector<int64>;

// F_{p^k} as an immutable context; all element operations are pure.
// k = 1 is the prime field (modulus x, elements are constants).
class FiniteField {
public:
    static FiniteField prime(int64 p);
    static FiniteField extension(int64 p, int k);

    int64 p() const { return p_; }
    int degree() const { return k_; }
    const std::vector<int64>& modulus() const { return modulus_; }
    BigInt order() const;

    FieldElement zero() const { return FieldElement(k_, 0); }
    FieldElement one() const;
    FieldElement from_int(int64 a) const;
    FieldElement gen() const;  // the class of x (for k = 1 this is 0)

    bool is_zero(const FieldElement& a) const;
    bool eq(const FieldElement& a, const FieldElement& b) const { return a == b; }

    FieldElement add(const FieldElement& a, const FieldElement& b) const;
    FieldElement sub(const FieldElement& a, const FieldElement& b) const;
    FieldElement neg(const FieldElement& a) const;
    FieldElement mul(const FieldElement& a, const FieldElement& b) const;
    FieldElement inv(const FieldElement& a) const;
    FieldElement div(const FieldElement& a, const FieldElement& b) const { return mul(a, inv(b)); }
    FieldElement pow(const FieldElement& a, BigInt e) const;

    // x -> x^p, the generator of Gal(F_{p^k}/F_p).
    FieldElement frobenius(const FieldElement& a) const;

    bool is_square(const FieldElement& a) const;
    // One square root r (the other is -r), deterministically chosen; empty if none.
    std::optional<FieldElement> sqrt(const FieldElement& a) const;

    bool in_prime_field(const FieldElement& a) const;
    int64 to_int(const FieldElement& a) const;  // requires in_prime_field

    // the element whose coefficient vector is the base-p expansion of code
    FieldElement element_from_code(BigInt code) const;

    std::string key(const FieldElement& a) const;  // canonical bytes, usable as map key

private:
    FiniteField(int64 p, int k, std::vector<int64> modulus);

    int64 p_ = 0;
    int k_ = 0;
    std::vector<int64> modulus_;  // monic, degree k
};

// sqrt in F_p proper, returning the pair {r, p-r} collapsed to the smaller root.
std::optional<int64> sqrt_mod_prime(int64 a, int64 p);

}  // namespace ellhom
