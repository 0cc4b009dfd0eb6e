#include "ellhom/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace ellhom {

Mat2 Mat2::mul(const Mat2& o) const {
    Mat2 r{n, {}};
    r.e[0] = mod_reduce(mul_mod(e[0], o.e[0], n) + mul_mod(e[1], o.e[2], n), n);
    r.e[1] = mod_reduce(mul_mod(e[0], o.e[1], n) + mul_mod(e[1], o.e[3], n), n);
    r.e[2] = mod_reduce(mul_mod(e[2], o.e[0], n) + mul_mod(e[3], o.e[2], n), n);
    r.e[3] = mod_reduce(mul_mod(e[2], o.e[1], n) + mul_mod(e[3], o.e[3], n), n);
    return r;
}

Mat2 Mat2::add(const Mat2& o) const {
    Mat2 r{n, {}};
    for (int i = 0; i < 4; ++i) r.e[i] = mod_reduce(e[i] + o.e[i], n);
    return r;
}

Mat2 Mat2::scale(int64 s) const {
    Mat2 r{n, {}};
    s = mod_reduce(s, n);
    for (int i = 0; i < 4; ++i) r.e[i] = mul_mod(e[i], s, n);
    return r;
}

Mat2 Mat2::pow(BigInt k) const {
    Mat2 r = identity(n);
    Mat2 b = *this;
    while (k > 0) {
        if ((k & 1) != 0) r = r.mul(b);
        b = b.mul(b);
        k >>= 1;
    }
    return r;
}

Mat2 Mat2::reduced(int64 m) const {
    Mat2 r{m, {}};
    for (int i = 0; i < 4; ++i) r.e[i] = mod_reduce(e[i], m);
    return r;
}

int64 Mat2::det() const { return mod_reduce(mul_mod(e[0], e[3], n) - mul_mod(e[1], e[2], n), n); }

bool Mat2::is_identity() const {
    return e[0] == 1 % n && e[3] == 1 % n && e[1] == 0 && e[2] == 0;
}

Mat2 Mat2::inverse() const {
    int64 d = det();
    if (gcd64(d, n) != 1) fail(ErrorCode::precondition, "matrix not invertible mod n");
    int64 di = inv_mod(d, n);
    Mat2 r{n, {}};
    r.e[0] = mul_mod(e[3], di, n);
    r.e[1] = mul_mod(mod_reduce(-e[1], n), di, n);
    r.e[2] = mul_mod(mod_reduce(-e[2], n), di, n);
    r.e[3] = mul_mod(e[0], di, n);
    return r;
}

int64 mat2_order(const Mat2& m, int64 bound) {
    if (!m.invertible()) fail(ErrorCode::precondition, "order of a singular matrix");
    Mat2 acc = m;
    for (int64 k = 1; k <= bound; ++k) {
        if (acc.is_identity()) return k;
        acc = acc.mul(m);
    }
    fail(ErrorCode::cap_exceeded, "matrix order exceeds bound");
}

// ---------------------------------------------------------------------------

namespace {

struct XGcd {
    int64 g, s, t;
};

XGcd xgcd(int64 a, int64 b) {
    int64 s0 = 1, t0 = 0, s1 = 0, t1 = 1;
    while (b != 0) {
        int64 q = a / b;
        int64 r = a - q * b;
        a = b;
        b = r;
        int64 s2 = s0 - q * s1, t2 = t0 - q * t1;
        s0 = s1;
        t0 = t1;
        s1 = s2;
        t1 = t2;
    }
    if (a < 0) return {-a, -s0, -t0};
    return {a, s0, t0};
}

BigInt big_abs(const BigInt& x) { return x < 0 ? -x : x; }

}  // namespace

SmithResult smith_normal_form(std::vector<std::vector<BigInt>> a) {
    size_t rows = a.size();
    size_t cols = rows == 0 ? 0 : a[0].size();
    std::vector<std::vector<BigInt>> v(cols, std::vector<BigInt>(cols, 0));
    for (size_t i = 0; i < cols; ++i) v[i][i] = 1;

    size_t t = 0;
    while (t < rows && t < cols) {
        // locate smallest nonzero pivot in the trailing block
        size_t pi = t, pj = t;
        BigInt best = 0;
        for (size_t i = t; i < rows; ++i)
            for (size_t j = t; j < cols; ++j)
                if (a[i][j] != 0 && (best == 0 || big_abs(a[i][j]) < best)) {
                    best = big_abs(a[i][j]);
                    pi = i;
                    pj = j;
                }
        if (best == 0) break;
        std::swap(a[t], a[pi]);
        for (size_t i = 0; i < rows; ++i) std::swap(a[i][t], a[i][pj]);
        std::swap(v[t], v[pj]);

        bool clean = false;
        while (!clean) {
            clean = true;
            for (size_t i = t + 1; i < rows; ++i) {
                if (a[i][t] == 0) continue;
                BigInt q = a[i][t] / a[t][t];
                for (size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
                if (a[i][t] != 0) {
                    std::swap(a[t], a[i]);
                    clean = false;
                }
            }
            for (size_t j = t + 1; j < cols; ++j) {
                if (a[t][j] == 0) continue;
                BigInt q = a[t][j] / a[t][t];
                for (size_t i = 0; i < rows; ++i) a[i][j] -= q * a[i][t];
                for (size_t i = 0; i < cols; ++i) v[i][j] -= q * v[i][t];
                if (a[t][j] != 0) {
                    for (size_t i = 0; i < rows; ++i) std::swap(a[i][t], a[i][j]);
                    std::swap(v[t], v[j]);
                    // v rows track columns of A; swapping columns means swapping
                    // the corresponding rows of V^T, i.e. columns of V
                    clean = false;
                }
            }
        }
        // divisibility chain
        bool redo = false;
        for (size_t i = t + 1; i < rows && !redo; ++i)
            for (size_t j = t + 1; j < cols && !redo; ++j)
                if (a[i][j] % a[t][t] != 0) {
                    for (size_t r = 0; r < rows; ++r) a[r][t] += a[r][j];
                    for (size_t r = 0; r < cols; ++r) v[r][t] += v[r][j];
                    redo = true;
                }
        if (redo) continue;
        if (a[t][t] < 0) {
            for (size_t r = 0; r < rows; ++r) a[r][t] = -a[r][t];
            for (size_t r = 0; r < cols; ++r) v[r][t] = -v[r][t];
        }
        ++t;
    }

    SmithResult out;
    for (size_t i = 0; i < std::min(rows, cols); ++i) out.diag.push_back(a[i][i]);
    out.right = std::move(v);
    return out;
}

KernelModN kernel_mod_n(const std::vector<std::vector<BigInt>>& a, int64 n) {
    size_t cols = a.empty() ? 0 : a[0].size();
    SmithResult snf = smith_normal_form(a);
    KernelModN out;
    out.cardinality = 1;
    for (size_t i = 0; i < cols; ++i) {
        BigInt d = i < snf.diag.size() ? snf.diag[i] : BigInt(0);
        BigInt g = d == 0 ? BigInt(n) : boost::multiprecision::gcd(d, BigInt(n));
        out.cardinality *= g;
        if (g == 1) continue;
        int64 step = static_cast<int64>(BigInt(n) / g);
        std::vector<int64> gen(cols, 0);
        for (size_t r = 0; r < cols; ++r)
            gen[r] = static_cast<int64>((((snf.right[r][i] * step) % n) + n) % n);
        bool nonzero = false;
        for (int64 x : gen) nonzero |= x != 0;
        if (nonzero) out.generators.push_back(std::move(gen));
    }
    return out;
}

int64 kernel_size_mod_n(const Mat2& m) {
    std::vector<std::vector<BigInt>> a = {{BigInt(m.e[0]), BigInt(m.e[1])},
                                          {BigInt(m.e[2]), BigInt(m.e[3])}};
    SmithResult snf = smith_normal_form(a);
    int64 count = 1;
    for (size_t i = 0; i < 2; ++i) {
        BigInt d = i < snf.diag.size() ? snf.diag[i] : BigInt(0);
        BigInt g = d == 0 ? BigInt(m.n) : boost::multiprecision::gcd(d, BigInt(m.n));
        count *= static_cast<int64>(g);
    }
    return count;
}

// ---------------------------------------------------------------------------

HowellForm::HowellForm(int64 n, int width, const std::vector<std::vector<int64>>& generators)
    : n_(n), width_(width) {
    auto leading_col = [&](const std::vector<int64>& r) {
        for (int j = 0; j < width_; ++j)
            if (r[j] != 0) return j;
        return width_;
    };
    std::vector<std::vector<int64>> pivot(width_);
    std::vector<std::vector<int64>> queue;
    for (const auto& g : generators) {
        std::vector<int64> r(width_);
        for (int j = 0; j < width_; ++j) r[j] = mod_reduce(g[j], n_);
        queue.push_back(std::move(r));
    }

    auto process = [&](std::vector<std::vector<int64>> work) {
        while (!work.empty()) {
            std::vector<int64> r = std::move(work.back());
            work.pop_back();
            int j = leading_col(r);
            if (j == width_) continue;
            if (pivot[j].empty()) {
                pivot[j] = std::move(r);
                continue;
            }
            auto& u = pivot[j];
            XGcd x = xgcd(u[j], r[j]);
            std::vector<int64> w(width_), w2(width_);
            int64 cu = r[j] / x.g, cr = u[j] / x.g;
            for (int c = 0; c < width_; ++c) {
                w[c] = mod_reduce(mul_mod(mod_reduce(x.s, n_), u[c], n_) +
                                      mul_mod(mod_reduce(x.t, n_), r[c], n_),
                                  n_);
                w2[c] = mod_reduce(mul_mod(mod_reduce(cu, n_), u[c], n_) -
                                       mul_mod(mod_reduce(cr, n_), r[c], n_),
                                   n_);
            }
            pivot[j] = std::move(w);
            if (leading_col(w2) < width_) work.push_back(std::move(w2));
        }
    };

    process(std::move(queue));
    // Howell closure: the annihilator multiple of each pivot row must itself
    // lie in the span of the later pivots; sweep until a fixpoint.
    for (int pass = 0;; ++pass) {
        if (pass > 4 * width_ + 8) fail(ErrorCode::internal, "Howell closure did not converge");
        auto before = pivot;
        for (int j = 0; j < width_; ++j) {
            if (pivot[j].empty()) continue;
            int64 g = gcd64(pivot[j][j], n_);
            int64 ann = n_ / g;
            if (ann == 1) continue;
            std::vector<int64> r(width_);
            bool nonzero = false;
            for (int c = 0; c < width_; ++c) {
                r[c] = mul_mod(mod_reduce(ann, n_), pivot[j][c], n_);
                nonzero |= r[c] != 0;
            }
            if (nonzero) process({std::move(r)});
        }
        if (pivot == before) break;
    }

    // normalize pivots: leading entry becomes gcd(entry, n)
    for (int j = 0; j < width_; ++j) {
        if (pivot[j].empty()) continue;
        int64 a = pivot[j][j];
        int64 g = gcd64(a, n_);
        if (a != g) {
            int64 ap = a / g, np = n_ / g;
            int64 u = np == 1 ? 1 : inv_mod(mod_reduce(ap, np), np);
            while (gcd64(u, n_) != 1) u += np;
            for (int c = 0; c < width_; ++c) pivot[j][c] = mul_mod(u, pivot[j][c], n_);
        }
    }
    // reduce entries above later pivots
    for (int j = 0; j < width_; ++j) {
        if (pivot[j].empty()) continue;
        int64 g = pivot[j][j];
        for (int i = 0; i < j; ++i) {
            if (pivot[i].empty() || pivot[i][j] == 0) continue;
            int64 q = pivot[i][j] / g;
            for (int c = 0; c < width_; ++c)
                pivot[i][c] = mod_reduce(pivot[i][c] - mul_mod(mod_reduce(q, n_), pivot[j][c], n_), n_);
        }
    }
    for (int j = 0; j < width_; ++j) {
        if (pivot[j].empty()) continue;
        rows_.push_back(pivot[j]);
        leading_.push_back(pivot[j][j]);
    }
}

bool HowellForm::contains(std::vector<int64> v) const {
    for (auto& c : v) c = mod_reduce(c, n_);
    for (size_t ri = 0; ri < rows_.size(); ++ri) {
        int j = 0;
        while (j < width_ && rows_[ri][j] == 0) ++j;
        if (v[j] == 0) continue;
        if (v[j] % leading_[ri] != 0) return false;
        int64 q = v[j] / leading_[ri];
        for (int c = 0; c < width_; ++c)
            v[c] = mod_reduce(v[c] - mul_mod(mod_reduce(q, n_), rows_[ri][c], n_), n_);
    }
    for (int64 c : v)
        if (c != 0) return false;
    return true;
}

BigInt HowellForm::cardinality() const {
    BigInt total = 1;
    for (int64 g : leading_) total *= n_ / g;
    return total;
}

// ---------------------------------------------------------------------------

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            BigInt s = 0;
            for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
            r[i][j] = s;
        }
    return r;
}

Mat4 mat4_transpose(const Mat4& a) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i][j] = a[j][i];
    return r;
}

namespace {
BigInt det3(const Mat4& a, int skip_row, int skip_col) {
    std::array<std::array<BigInt, 3>, 3> m{};
    int ri = 0;
    for (int i = 0; i < 4; ++i) {
        if (i == skip_row) continue;
        int ci = 0;
        for (int j = 0; j < 4; ++j) {
            if (j == skip_col) continue;
            m[ri][ci++] = a[i][j];
        }
        ++ri;
    }
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}
}  // namespace

BigInt mat4_det(const Mat4& a) {
    BigInt d = 0;
    int sign = 1;
    for (int j = 0; j < 4; ++j) {
        d += sign * a[0][j] * det3(a, 0, j);
        sign = -sign;
    }
    return d;
}

bool mat4_is_scalar(const Mat4& a, const BigInt& s) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (a[i][j] != (i == j ? s : BigInt(0))) return false;
    return true;
}

}  // namespace ellhom
