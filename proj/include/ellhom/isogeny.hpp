#pragma once

#include <variant>

#include "ellhom/torsion.hpp"

namespace ellhom {

struct KernelSubgroup {
    int64 order = 1;
    int ambient_degree = 1;
    Point generator;                  // infinity for the trivial kernel
    std::vector<Point> points;        // the whole subgroup, deterministic order
    std::vector<int64> kernel_poly;   // prod (x - x_Q) over Q != O, monic over F_p
};

// Separable kernel-generated isogeny in short Weierstrass form, stored as
// rational maps with F_p coefficients so it evaluates over any extension.
class Isogeny {
public:
    const Curve& domain() const { return domain_; }
    const Curve& codomain() const { return codomain_; }
    int64 degree() const { return degree_; }
    const KernelSubgroup& kernel() const { return kernel_; }
    const std::vector<int64>& x_num() const { return xnum_; }
    const std::vector<int64>& x_den() const { return xden_; }

    Point eval(int ambient_degree, const Point& pt) const;

    friend Isogeny velu(TorsionContext& ctx, const KernelSubgroup& kernel);

private:
    Curve domain_ = Curve::over_prime(5, 1, 0);  // overwritten by velu
    Curve codomain_ = Curve::over_prime(5, 1, 0);
    int64 degree_ = 1;
    KernelSubgroup kernel_;
    std::vector<int64> xnum_, xden_, ynum_, yden_;
};

// Velu construction for a Galois-stable kernel subgroup of E.
Isogeny velu(TorsionContext& ctx, const KernelSubgroup& kernel);

// All Galois-stable cyclic subgroups of order d with points within the degree
// cap, deduplicated by kernel polynomial, sorted deterministically.
std::vector<KernelSubgroup> stable_cyclic_kernels(TorsionContext& ctx, int64 d);

// A homomorphism E -> E' evaluable on points over any extension: a chain of
// isogeny / twist / Frobenius / scalar stages. Degrees multiply along the chain.
class PointMap {
public:
    struct IsogenyStage {
        Isogeny iso;
    };
    struct TwistStage {
        int64 u;
        Curve from, to;
    };
    struct FrobeniusStage {
        int power;
    };
    struct ScalarStage {
        int64 m;
    };
    using Stage = std::variant<IsogenyStage, TwistStage, FrobeniusStage, ScalarStage>;

    static PointMap identity(const Curve& e);
    static PointMap from_isogeny(const Isogeny& iso);
    static PointMap scalar_map(const Curve& e, int64 m);

    PointMap then_twist(int64 u, const Curve& target) const;
    PointMap then_frobenius(int power) const;
    PointMap then(const PointMap& next) const;

    const Curve& domain() const { return domain_; }
    const Curve& codomain() const { return codomain_; }
    BigInt degree() const { return degree_; }
    bool separable() const { return separable_; }
    const std::vector<Stage>& stages() const { return stages_; }

    Point eval(int ambient_degree, const Point& pt) const;

private:
    Curve domain_ = Curve::over_prime(5, 1, 0);
    Curve codomain_ = Curve::over_prime(5, 1, 0);
    BigInt degree_ = 1;
    bool separable_ = true;
    std::vector<Stage> stages_;
};

// the dual-direction map: kernel = u(E[d]); composed back to u's domain
PointMap dual_map(TorsionContext& ctx_domain, TorsionContext& ctx_codomain, const PointMap& u);

// isogenies E -> E' of exact degree d found by stable-kernel search + twist match
std::vector<PointMap> isogenies_between(TorsionContext& e, const Curve& target, int64 d);

struct HomLattice;

// integer combination of the lattice generators, evaluated pointwise
struct HomElement {
    const HomLattice* lattice = nullptr;
    std::vector<int64> coeffs;

    Point eval(int ambient_degree, const Point& pt) const;
    bool is_zero_map() const;
};

struct HomLattice {
    TorsionContext* domain_ctx = nullptr;
    Curve domain = Curve::over_prime(5, 1, 0);
    Curve codomain = Curve::over_prime(5, 1, 0);
    int rank = 0;
    std::vector<PointMap> generators;
    std::vector<std::vector<BigInt>> gram;  // G_ii = 2 deg, G_ij = <psi_i, psi_j>
    BigInt gram_det = 0;
    // degree-1 reference map used by degree measurements (dual precomputed)
    std::optional<std::pair<PointMap, PointMap>> reference;  // (w0, dual of w0)

    HomElement element(std::vector<int64> coeffs) const;
    BigInt degree_form(const std::vector<int64>& coeffs) const;  // via Gram
};

HomLattice hom_lattice(TorsionContext& e, TorsionContext& e2, const Curve& target,
                       int64 degree_bound);

// exact degree of a hom element (kernel/action measurement at coprime levels)
BigInt degree_of_hom(const HomElement& u);

struct CoprimeIsoReport {
    int64 level = 0;
    Mat2 matrix;           // induced map on E[n] -> E'[n]
    bool invertible = false;
    BigInt degree = 0;
    int64 gcd_degree_level = 0;
    bool biconditional_holds = false;  // invertible <=> gcd(deg, n) = 1
};

// induced torsion map of an isogeny/hom as a matrix, plus the lemma check
CoprimeIsoReport coprime_iso_check(TorsionContext& e, TorsionContext& e2, const PointMap& u,
                                   int64 n);
CoprimeIsoReport coprime_iso_check(TorsionContext& e, TorsionContext& e2, const HomElement& u,
                                   int64 n, const BigInt& known_degree);

// Chinese-remainder combination: u = v^(ell) mod ell * lattice for each ell | n;
// the result induces invertible torsion maps at every prime of n.
struct CrtCombineResult {
    HomElement element;
    std::vector<CoprimeIsoReport> prime_checks;
};
CrtCombineResult crt_combine(TorsionContext& e, TorsionContext& e2, const HomLattice& lattice,
                             const std::vector<std::pair<int64, std::vector<int64>>>& candidates,
                             int64 n);

}  // namespace ellhom
