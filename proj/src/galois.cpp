#include "ellhom/galois.hpp"

#include <numeric>

namespace ellhom {

IntertwinerModule intertwiners_from_matrices(const Mat2& f_domain, const Mat2& f_codomain) {
    if (f_domain.n != f_codomain.n) fail(ErrorCode::precondition, "level mismatch");
    int64 n = f_domain.n;
    // unknowns vec(M) = (m00, m01, m10, m11); equations M F - F' M = 0
    std::vector<std::vector<BigInt>> sys(4, std::vector<BigInt>(4, 0));
    auto var = [](int a, int b) { return 2 * a + b; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            int eq = 2 * i + j;
            for (int k = 0; k < 2; ++k) {
                sys[eq][var(i, k)] += f_domain.at(k, j);
                sys[eq][var(k, j)] -= f_codomain.at(i, k);
            }
        }
    KernelModN ker = kernel_mod_n(sys, n);

    IntertwinerModule out;
    out.level = n;
    out.frob_domain = f_domain;
    out.frob_codomain = f_codomain;
    out.module = std::make_shared<HowellForm>(n, 4, ker.generators);
    if (out.module->cardinality() != ker.cardinality)
        fail(ErrorCode::internal, "intertwiner module counts disagree");
    out.cardinality = ker.cardinality;
    for (const auto& g : ker.generators) out.generators.push_back(Mat2{n, {g[0], g[1], g[2], g[3]}});
    // every generator must actually intertwine
    for (const Mat2& g : out.generators)
        if (!(g.mul(f_domain) == f_codomain.mul(g)))
            fail(ErrorCode::internal, "intertwiner generator fails the defining relation");
    return out;
}

IntertwinerModule intertwiners(TorsionContext& e, TorsionContext& e2, int64 n) {
    if (gcd64(n, e.p()) != 1) fail(ErrorCode::precondition, "level must be prime to p");
    return intertwiners_from_matrices(e.frobenius_matrix(n), e2.frobenius_matrix(n));
}

BigInt intertwiner_count_bruteforce(const Mat2& f_domain, const Mat2& f_codomain) {
    int64 n = f_domain.n;
    BigInt count = 0;
    Mat2 m{n, {}};
    for (int64 a = 0; a < n; ++a)
        for (int64 b = 0; b < n; ++b)
            for (int64 c = 0; c < n; ++c)
                for (int64 d = 0; d < n; ++d) {
                    m.e = {a, b, c, d};
                    if (m.mul(f_domain) == f_codomain.mul(m)) ++count;
                }
    return count;
}

GaloisIsoResult invertible_intertwiner(const IntertwinerModule& mod) {
    GaloisIsoResult res;
    int64 n = mod.level;
    mod.module->for_each([&](const std::vector<int64>& v) {
        if (res.isomorphic) return;
        Mat2 m{n, {v[0], v[1], v[2], v[3]}};
        if (m.invertible()) {
            res.isomorphic = true;
            res.witness = m;
        }
    });
    return res;
}

GaloisIsoResult galois_isomorphic(TorsionContext& e, TorsionContext& e2, int64 n) {
    IntertwinerModule mod = intertwiners(e, e2, n);
    return invertible_intertwiner(mod);
}

// ---------------------------------------------------------------------------

TorsionTower::TorsionTower(TorsionContext& e, TorsionContext& e2, int64 ell, int depth)
    : ell_(ell), depth_(depth) {
    if (!is_prime(ell)) fail(ErrorCode::precondition, "tower wants a prime ell");
    if (ell == e.p()) fail(ErrorCode::precondition, "tower prime must differ from p");
    int64 top = 1;
    for (int i = 0; i < depth; ++i) {
        top *= ell;
        levels_.push_back(top);
    }
    int m1 = e.full_torsion_degree(top);
    int m2 = e2.full_torsion_degree(top);
    ambient_ = static_cast<int>(std::lcm(m1, m2));
    if (ambient_ > e.caps().max_degree) fail(ErrorCode::cap_exceeded, "tower ambient degree above cap");

    const TorsionBasis& b1 = e.basis_at(top, ambient_);
    const TorsionBasis& b2 = e2.basis_at(top, ambient_);
    c1_ = b1.curve;
    c2_ = b2.curve;

    // level ell^{i+1} basis = ell^{depth-1-i} * top basis
    for (int i = 0; i < depth; ++i) {
        BigInt step = boost::multiprecision::pow(BigInt(ell), depth - 1 - i);
        p1_.push_back(c1_->mul(step, b1.P));
        q1_.push_back(c1_->mul(step, b1.Q));
        p2_.push_back(c2_->mul(step, b2.P));
        q2_.push_back(c2_->mul(step, b2.Q));
    }
    auto build_table = [](const Curve& ec, const Point& p, const Point& q, int64 n) {
        std::unordered_map<std::string, std::pair<int64, int64>> table;
        Point row = Point::infinity();
        for (int64 i = 0; i < n; ++i) {
            Point cell = row;
            for (int64 j = 0; j < n; ++j) {
                auto [it, fresh] = table.emplace(ec.point_key(cell), std::make_pair(i, j));
                if (!fresh) fail(ErrorCode::internal, "derived tower basis not independent");
                cell = ec.add(cell, q);
            }
            row = ec.add(row, p);
        }
        return table;
    };
    for (int i = 0; i < depth; ++i) {
        dlog1_.push_back(build_table(*c1_, p1_[i], q1_[i], levels_[i]));
        dlog2_.push_back(build_table(*c2_, p2_[i], q2_[i], levels_[i]));
    }
    for (int i = 0; i < depth; ++i) {
        auto frob_of = [&](const Curve& ec, int curve_idx, const Point& p, const Point& q) {
            auto [a, c] = dlog(curve_idx, i, ec.frobenius_point(p));
            auto [b, d] = dlog(curve_idx, i, ec.frobenius_point(q));
            return Mat2{levels_[i], {a, b, c, d}};
        };
        frob1_.push_back(frob_of(*c1_, 1, p1_[i], q1_[i]));
        frob2_.push_back(frob_of(*c2_, 2, p2_[i], q2_[i]));
    }
    // compatibility: the level-i matrix is the reduction of the level-(i+1) one
    for (int i = 0; i + 1 < depth; ++i) {
        if (!(frob1_[i + 1].reduced(levels_[i]) == frob1_[i]) ||
            !(frob2_[i + 1].reduced(levels_[i]) == frob2_[i]))
            fail(ErrorCode::internal, "tower Frobenius matrices not reduction-compatible");
    }
    for (int i = 0; i < depth; ++i)
        modules_.push_back(intertwiners_from_matrices(frob1_[i], frob2_[i]));
}

std::pair<int64, int64> TorsionTower::dlog(int curve, int i, const Point& pt) const {
    const auto& table = curve == 1 ? dlog1_[i] : dlog2_[i];
    const Curve& ec = curve == 1 ? *c1_ : *c2_;
    auto it = table.find(ec.point_key(pt));
    if (it == table.end()) fail(ErrorCode::internal, "point outside tower torsion group");
    return it->second;
}

Mat2 TorsionTower::action_matrix(int i, const std::function<Point(const Point&)>& map) const {
    auto [a, c] = dlog(2, i, map(p1_[i]));
    auto [b, d] = dlog(2, i, map(q1_[i]));
    return Mat2{levels_[i], {a, b, c, d}};
}

TowerReport level_tower_stabilization(TorsionTower& tower) {
    TowerReport rep;
    rep.ell = tower.ell();
    rep.depth = tower.depth();
    for (int i = 0; i < tower.depth(); ++i) {
        TowerLevelReport lvl;
        lvl.modulus = tower.level(i);
        lvl.module_cardinality = tower.module_at(i).cardinality;
        std::vector<std::shared_ptr<HowellForm>> images;
        for (int j = 0; i + j < tower.depth(); ++j) {
            const IntertwinerModule& high = tower.module_at(i + j);
            std::vector<std::vector<int64>> reduced;
            for (const Mat2& g : high.generators) {
                Mat2 r = g.reduced(lvl.modulus);
                reduced.push_back({r.e[0], r.e[1], r.e[2], r.e[3]});
            }
            auto img = std::make_shared<HowellForm>(lvl.modulus, 4, reduced);
            lvl.image_cardinalities.push_back(img->cardinality());
            images.push_back(std::move(img));
        }
        lvl.stabilized_image = images.back();
        lvl.stabilization_offset = static_cast<int>(images.size()) - 1;
        for (int j = static_cast<int>(images.size()) - 1; j >= 0; --j) {
            if (*images[j] == *images.back())
                lvl.stabilization_offset = j;
            else
                break;
        }
        rep.levels.push_back(std::move(lvl));
    }
    return rep;
}

// ---------------------------------------------------------------------------

BigInt unit_root(int64 a_p, int64 p, int precision) {
    if (precision < 1) fail(ErrorCode::precondition, "precision must be >= 1");
    if (a_p % p == 0) fail(ErrorCode::precondition, "unit root needs an ordinary trace (p does not divide a_p)");
    BigInt mod = p;
    BigInt u = mod_reduce(a_p, p);
    for (int k = 1; k < precision; ++k) {
        mod *= p;
        // Hensel step: f(u) = u^2 - a u + p, f'(u) = 2u - a is a unit mod p
        BigInt f = ((u * u - a_p * u + p) % mod + mod) % mod;
        BigInt fp = ((2 * u - a_p) % mod + mod) % mod;
        // invert fp mod `mod`
        BigInt t0 = 0, t1 = 1, r0 = mod, r1 = fp;
        while (r1 != 0) {
            BigInt q = r0 / r1;
            BigInt tmp = t0 - q * t1;
            t0 = t1;
            t1 = tmp;
            tmp = r0 - q * r1;
            r0 = r1;
            r1 = tmp;
        }
        if (r0 != 1) fail(ErrorCode::internal, "derivative not invertible in Hensel lifting");
        BigInt inv = ((t0 % mod) + mod) % mod;
        u = ((u - f * inv) % mod + mod) % mod;
    }
    if ((u * u - a_p * u + p) % mod != 0) fail(ErrorCode::internal, "unit root fails its equation");
    if (u % p == 0) fail(ErrorCode::internal, "unit root is not a unit");
    return u;
}

PPartReport p_part_isomorphic(TorsionContext& e, TorsionContext& e2, int precision) {
    if (e.p() != e2.p()) fail(ErrorCode::precondition, "curves live over different prime fields");
    if (!e.ordinary() || !e2.ordinary())
        fail(ErrorCode::precondition, "p-part comparison wants ordinary curves");
    PPartReport rep;
    rep.precision = precision;
    rep.modulus = boost::multiprecision::pow(BigInt(e.p()), precision);
    rep.unit_root_1 = unit_root(e.trace(), e.p(), precision);
    rep.unit_root_2 = unit_root(e2.trace(), e2.p(), precision);
    rep.isomorphic = e.trace() == e2.trace();
    return rep;
}

}  // namespace ellhom
