#ifndef ECODYN_MODEL_HPP
#define ECODYN_MODEL_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace ecodyn {

using Vec = std::vector<double>;

// Dense row-major matrix, just enough for the model coefficients.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class GrowthKind { Liebig, Holling };

// Saturating growth response: the Liebig minimum over resources, or the
// single-resource Holling form r v / (K + v).
struct GrowthLaw {
    GrowthKind kind = GrowthKind::Holling;
    Vec r;     // maximal consumption rates, one per species
    Matrix K;  // half-saturation constants, species x resources

    std::size_t species_count() const { return r.size(); }
    std::size_t resource_count() const { return K.cols(); }
    void validate() const;  // throws std::invalid_argument
};

struct EcosystemParams {
    std::size_t M = 0;  // species
    std::size_t m = 0;  // resources
    Vec mu;             // mortality rates, size M
    Vec gamma;          // self-limitation coefficients, size M
    Matrix c;           // resource content, m x M (c(k,i))
    Vec D;              // turnover rates, size m
    Vec S;              // supplies, size m
    GrowthLaw growth;
    Vec x_ext;          // extinction thresholds, size M; all-zero = no-extinction model

    bool thresholds_active() const;
    void validate() const;  // throws std::invalid_argument
};

struct StabilityReport {
    double rho = 0.0;
    Vec lipschitz;       // per-resource constants L_k
    bool satisfied = false;
    // Index convention used to evaluate rho, recorded for the report.
    std::string interpretation;
};

struct ViabilityPartition {
    std::vector<std::size_t> viable;
    std::vector<std::size_t> doomed;
};

// phi_i(v); throws on bad index or negative resource coordinate.
double evaluate_growth(const GrowthLaw& growth, std::size_t i, const Vec& v);

// Species with phi_i(S) <= mu_i are doomed (they vanish in the long run).
ViabilityPartition viability_filter(const EcosystemParams& params);

// Per-resource Lipschitz constants of the growth responses on [0,S]:
// L_j = max_i r_i / K_ij, the slope of v/(K+v) at v = 0.
Vec lipschitz_constants(const GrowthLaw& growth, const Vec& S);

// Contraction coefficient rho = max_k sum_j c_kj L_k (2 phi_j(S) - mu_j) / (D_k gamma_j).
// Requires all species viable; throws otherwise.
StabilityReport compute_rho(const EcosystemParams& params);

// Copy of params restricted to the given species subset (resources unchanged).
EcosystemParams restrict_species(const EcosystemParams& params,
                                 const std::vector<std::size_t>& keep);

}  // namespace ecodyn

#endif
