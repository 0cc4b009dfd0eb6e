#pragma once

#include <array>
#include <vector>

#include "ellhom/arith.hpp"

namespace ellhom {

// 2x2 matrix over Z/n, row-major [a b; c d].
struct Mat2 {
    int64 n = 0;
    std::array<int64, 4> e{0, 0, 0, 0};

    static Mat2 identity(int64 n) { return {n, {1 % n, 0, 0, 1 % n}}; }
    static Mat2 zero(int64 n) { return {n, {0, 0, 0, 0}}; }

    int64 at(int r, int c) const { return e[2 * r + c]; }
    void set(int r, int c, int64 v) { e[2 * r + c] = mod_reduce(v, n); }

    Mat2 mul(const Mat2& o) const;
    Mat2 add(const Mat2& o) const;
    Mat2 scale(int64 s) const;
    Mat2 pow(BigInt k) const;
    Mat2 reduced(int64 m) const;  // entries mod m
    int64 det() const;
    int64 trace() const { return mod_reduce(e[0] + e[3], n); }
    bool is_identity() const;
    bool invertible() const { return gcd64(det(), n) == 1; }
    Mat2 inverse() const;  // requires invertible
    bool operator==(const Mat2& o) const { return n == o.n && e == o.e; }
};

// multiplicative order of M in GL2(Z/n); bound guards against runaway loops
int64 mat2_order(const Mat2& m, int64 bound);

// Smith normal form of a small integer matrix: U*A*V = D with U, V unimodular.
// Only D and V are returned (enough to solve A x = 0 mod n).
struct SmithResult {
    std::vector<BigInt> diag;                // min(r,c) entries, divisibility chain
    std::vector<std::vector<BigInt>> right;  // V, c x c
};
SmithResult smith_normal_form(std::vector<std::vector<BigInt>> a);

// Generators of {x in (Z/n)^c : A x = 0 (mod n)} plus the exact solution count.
struct KernelModN {
    std::vector<std::vector<int64>> generators;
    BigInt cardinality;
};
KernelModN kernel_mod_n(const std::vector<std::vector<BigInt>>& a, int64 n);

// number of solutions of M x = 0 on (Z/n)^2 for a 2x2 matrix
int64 kernel_size_mod_n(const Mat2& m);

// Canonical Howell form of a submodule of (Z/n)^width given by generators.
// Unique per module, so equality of modules is equality of forms.
class HowellForm {
public:
    HowellForm(int64 n, int width, const std::vector<std::vector<int64>>& generators);

    int64 modulus() const { return n_; }
    int width() const { return width_; }
    const std::vector<std::vector<int64>>& rows() const { return rows_; }

    bool contains(std::vector<int64> v) const;
    bool operator==(const HowellForm& o) const { return n_ == o.n_ && rows_ == o.rows_; }
    BigInt cardinality() const;

    // iterate each module element exactly once
    template <typename F>
    void for_each(F&& fn) const {
        std::vector<int64> coeffs(rows_.size(), 0);
        std::vector<int64> limits(rows_.size());
        for (size_t i = 0; i < rows_.size(); ++i) limits[i] = n_ / leading_[i];
        std::vector<int64> v(width_, 0);
        iterate(0, v, limits, fn);
    }

private:
    template <typename F>
    void iterate(size_t i, std::vector<int64>& acc, const std::vector<int64>& limits, F&& fn) const {
        if (i == rows_.size()) {
            fn(acc);
            return;
        }
        std::vector<int64> cur = acc;
        for (int64 c = 0; c < limits[i]; ++c) {
            iterate(i + 1, cur, limits, fn);
            for (int w = 0; w < width_; ++w) cur[w] = mod_reduce(cur[w] + rows_[i][w], n_);
        }
    }

    int64 n_;
    int width_;
    std::vector<std::vector<int64>> rows_;  // pivots strictly right-down, normalized
    std::vector<int64> leading_;            // leading entry of each row, divides n
};

// 4x4 integer matrix helpers for the quaternion model.
using Mat4 = std::array<std::array<BigInt, 4>, 4>;
Mat4 mat4_mul(const Mat4& a, const Mat4& b);
Mat4 mat4_transpose(const Mat4& a);
BigInt mat4_det(const Mat4& a);
bool mat4_is_scalar(const Mat4& a, const BigInt& s);

}  // namespace ellhom
