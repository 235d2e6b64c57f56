#include "ecodyn/model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ecodyn {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool all_positive(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
}

}  // namespace

void GrowthLaw::validate() const {
    require(!r.empty(), "growth: empty rate vector");
    require(all_positive(r), "growth: rates r must be positive");
    require(K.rows() == r.size(), "growth: K row count must equal species count");
    require(K.cols() >= 1, "growth: K must have at least one column");
    require(std::all_of(K.data().begin(), K.data().end(), [](double k) { return k > 0.0; }),
            "growth: half-saturation constants must be positive");
    if (kind == GrowthKind::Holling)
        require(K.cols() == 1, "growth: Holling response requires a single resource");
}

bool EcosystemParams::thresholds_active() const {
    return std::any_of(x_ext.begin(), x_ext.end(), [](double x) { return x > 0.0; });
}

void EcosystemParams::validate() const {
    require(M >= 1 && m >= 1, "params: M and m must be positive");
    require(mu.size() == M && gamma.size() == M && x_ext.size() == M,
            "params: species vectors must have length M");
    require(D.size() == m && S.size() == m, "params: resource vectors must have length m");
    require(c.rows() == m && c.cols() == M, "params: c must be m x M");
    require(all_positive(mu), "params: mortalities mu must be positive");
    require(all_positive(gamma), "params: self-limitation gamma must be positive");
    require(all_positive(D), "params: turnover rates D must be positive");
    require(all_positive(S), "params: supplies S must be positive");
    require(std::all_of(c.data().begin(), c.data().end(), [](double x) { return x > 0.0; }),
            "params: resource contents c must be positive");
    require(std::all_of(x_ext.begin(), x_ext.end(), [](double x) { return x >= 0.0; }),
            "params: extinction thresholds must be nonnegative");
    growth.validate();
    require(growth.species_count() == M, "params: growth law species count mismatch");
    require(growth.resource_count() == m, "params: growth law resource count mismatch");
}

double evaluate_growth(const GrowthLaw& growth, std::size_t i, const Vec& v) {
    if (i >= growth.species_count())
        throw std::out_of_range("evaluate_growth: species index out of range");
    if (v.size() != growth.resource_count())
        throw std::invalid_argument("evaluate_growth: resource vector dimension mismatch");
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 0.0)
            throw std::invalid_argument("evaluate_growth: negative resource coordinate");
        ratio = std::min(ratio, v[k] / (growth.K(i, k) + v[k]));
    }
    return growth.r[i] * ratio;
}

ViabilityPartition viability_filter(const EcosystemParams& params) {
    params.validate();
    ViabilityPartition part;
    for (std::size_t i = 0; i < params.M; ++i) {
        if (evaluate_growth(params.growth, i, params.S) > params.mu[i])
            part.viable.push_back(i);
        else
            part.doomed.push_back(i);
    }
    return part;
}

Vec lipschitz_constants(const GrowthLaw& growth, const Vec& S) {
    (void)S;  // the analytic worst case sits at v = 0, independent of the box size
    Vec L(growth.resource_count(), 0.0);
    for (std::size_t j = 0; j < L.size(); ++j)
        for (std::size_t i = 0; i < growth.species_count(); ++i)
            L[j] = std::max(L[j], growth.r[i] / growth.K(i, j));
    return L;
}

StabilityReport compute_rho(const EcosystemParams& params) {
    params.validate();
    StabilityReport rep;
    rep.lipschitz = lipschitz_constants(params.growth, params.S);
    rep.interpretation =
        "rho = max_k sum_j c_kj * L_k * (2 phi_j(S) - mu_j) / (D_k gamma_j)";
    Vec phiS(params.M);
    for (std::size_t j = 0; j < params.M; ++j) {
        phiS[j] = evaluate_growth(params.growth, j, params.S);
        if (phiS[j] <= params.mu[j])
            throw std::invalid_argument(
                "compute_rho: non-viable species present; filter doomed species first");
    }
    double rho = 0.0;
    for (std::size_t k = 0; k < params.m; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < params.M; ++j)
            sum += params.c(k, j) * rep.lipschitz[k] * (2.0 * phiS[j] - params.mu[j]) /
                   (params.D[k] * params.gamma[j]);
        rho = std::max(rho, sum);
    }
    rep.rho = rho;
    rep.satisfied = rho <= 1.0;
    return rep;
}

EcosystemParams restrict_species(const EcosystemParams& params,
                                 const std::vector<std::size_t>& keep) {
    EcosystemParams out;
    out.M = keep.size();
    out.m = params.m;
    out.D = params.D;
    out.S = params.S;
    out.c = Matrix(params.m, keep.size());
    out.growth.kind = params.growth.kind;
    out.growth.K = Matrix(keep.size(), params.m);
    for (std::size_t idx = 0; idx < keep.size(); ++idx) {
        std::size_t i = keep[idx];
        if (i >= params.M) throw std::out_of_range("restrict_species: index out of range");
        out.mu.push_back(params.mu[i]);
        out.gamma.push_back(params.gamma[i]);
        out.x_ext.push_back(params.x_ext[i]);
        out.growth.r.push_back(params.growth.r[i]);
        for (std::size_t k = 0; k < params.m; ++k) {
            out.c(k, idx) = params.c(k, i);
            out.growth.K(idx, k) = params.growth.K(i, k);
        }
    }
    return out;
}

}  // namespace ecodyn
