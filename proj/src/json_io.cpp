#include "qdopt/json_io.hpp"

#include <nlohmann/json.hpp>

namespace qdopt {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("complex value must be a [re, im] array");
    return {j[0].get<double>(), j[1].get<double>()};
}

namespace {

json label_to_json(const OutcomeLabel& label) {
    if (std::holds_alternative<int>(label)) return std::get<int>(label);
    return complex_to_json(std::get<Complex>(label));
}

OutcomeLabel label_from_json(const json& j) {
    if (j.is_number_integer()) return j.get<int>();
    return complex_from_json(j);
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j, Eigen::Index expected) {
    if (!j.is_array() || Eigen::Index(j.size()) != expected)
        throw std::invalid_argument("element row count mismatch");
    Eigen::MatrixXcd m(expected, expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
        const json& row = j[std::size_t(i)];
        if (!row.is_array() || Eigen::Index(row.size()) != expected)
            throw std::invalid_argument("element column count mismatch");
        for (Eigen::Index k = 0; k < expected; ++k)
            m(i, k) = complex_from_json(row[std::size_t(k)]);
    }
    return m;
}

json real_vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

json povm_to_json(const DiscretePOVM& povm) {
    json j;
    j["dim"] = povm.dim().n_max;
    j["labels"] = json::array();
    for (const auto& label : povm.labels()) j["labels"].push_back(label_to_json(label));
    j["weights"] = povm.weights();
    j["elements"] = json::array();
    for (std::size_t k = 0; k < povm.size(); ++k) j["elements"].push_back(matrix_to_json(povm.element(k)));
    return j;
}

DiscretePOVM povm_from_json(const json& j) {
    FockDim dim(j.at("dim").get<int>());
    std::vector<OutcomeLabel> labels;
    for (const auto& l : j.at("labels")) labels.push_back(label_from_json(l));
    std::vector<double> weights = j.at("weights").get<std::vector<double>>();
    std::vector<Eigen::MatrixXcd> elements;
    for (const auto& e : j.at("elements")) elements.push_back(matrix_from_json(e, dim.size()));
    return DiscretePOVM(dim, std::move(elements), std::move(labels), std::move(weights));
}

json ensemble_to_json(const HypothesisEnsemble& ensemble) {
    json j;
    j["dim"] = ensemble.dim().n_max;
    j["priors"] = ensemble.priors;
    j["states"] = json::array();
    for (const auto& s : ensemble.states) j["states"].push_back(matrix_to_json(s.op.entries));
    json cost = json::array();
    for (Eigen::Index r = 0; r < ensemble.cost.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ensemble.cost.cols(); ++c) row.push_back(ensemble.cost(r, c));
        cost.push_back(std::move(row));
    }
    j["cost"] = std::move(cost);
    return j;
}

HypothesisEnsemble ensemble_from_json(const json& j) {
    FockDim dim(j.at("dim").get<int>());
    HypothesisEnsemble e;
    e.priors = j.at("priors").get<std::vector<double>>();
    for (const auto& s : j.at("states"))
        e.states.push_back(DensityOperator{TruncatedOperator{dim, matrix_from_json(s, dim.size())}});
    const json& cost = j.at("cost");
    Eigen::Index rows = Eigen::Index(cost.size());
    Eigen::Index cols = rows > 0 ? Eigen::Index(cost[0].size()) : 0;
    e.cost.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) e.cost(r, c) = cost[std::size_t(r)][std::size_t(c)].get<double>();
    validate(e);
    return e;
}

json optimality_report_to_json(const OptimalityReport& report) {
    json j;
    j["lambda"] = matrix_to_json(report.lambda_op.entries);
    j["lambda_hermiticity"] = report.lambda_hermiticity;
    j["stationarity_residuals"] = report.stationarity_residuals;
    j["min_eig_b"] = report.min_eig_b;
    j["tol"] = report.tol;
    j["stationarity_pass"] = report.stationarity_pass;
    j["nonnegativity_pass"] = report.nonnegativity_pass;
    return j;
}

json ml_certificate_to_json(const MlCertificate& cert) {
    json entries = json::array();
    for (const auto& e : cert.entries)
        entries.push_back({{"beta", complex_to_json(e.beta)},
                           {"eigen_residual", e.eigen_residual},
                           {"min_eig_b", e.min_eig_b}});
    return {{"L", cert.noise_l},
            {"n_max", cert.n_max},
            {"tol", cert.tol},
            {"entries", std::move(entries)},
            {"worst_eigen_residual", cert.worst_eigen_residual},
            {"worst_min_eig_b", cert.worst_min_eig_b},
            {"pass", cert.pass}};
}

json info_estimate_to_json(const InfoEstimate& estimate) {
    auto grid = [](const GridSpec& g) {
        return json{{"extent", g.extent}, {"step", g.step}, {"count", g.count}};
    };
    return {{"value_nats", estimate.value},
            {"value_bits", estimate.bits()},
            {"error_budget", estimate.error_budget},
            {"theta_grid", grid(estimate.theta_grid)},
            {"beta_grid", grid(estimate.beta_grid)},
            {"n_max", estimate.n_max}};
}

json variation_report_to_json(const VariationReport& report) {
    json samples = json::array();
    for (const auto& [id, value] : report.quadratic_form_samples)
        samples.push_back({{"perturbation", id}, {"delta2_r", value}});
    return {{"beta", complex_to_json(report.beta)},
            {"spectrum_b", real_vector_to_json(report.spectrum_b)},
            {"spectrum_d", real_vector_to_json(report.spectrum_d)},
            {"spectrum_b_minus_d", real_vector_to_json(report.spectrum_b_minus_d)},
            {"min_eig_b", report.min_eig_b},
            {"min_eig_d", report.min_eig_d},
            {"min_eig_b_minus_d", report.min_eig_b_minus_d},
            {"stationarity_residual", report.stationarity_residual},
            {"quadratic_form_samples", std::move(samples)}};
}

json local_certificate_to_json(const LocalOptimalityCertificate& cert) {
    json entries = json::array();
    for (const auto& e : cert.entries) entries.push_back(variation_report_to_json(e));
    return {{"entries", std::move(entries)},
            {"worst_min_eig_b", cert.worst_min_eig_b},
            {"worst_min_eig_d", cert.worst_min_eig_d},
            {"worst_min_eig_b_minus_d", cert.worst_min_eig_b_minus_d},
            {"worst_stationarity", cert.worst_stationarity},
            {"spectrum_deviation", cert.spectrum_deviation},
            {"tol", cert.tol},
            {"pass", cert.pass}};
}

json occupation_check_to_json(const OccupationCheck& check) {
    return {{"holds", check.holds},
            {"worst_margin", check.worst_margin},
            {"equality_cases", check.equality_cases},
            {"tuples_checked", check.tuples_checked}};
}

json identity_report_to_json(const IdentityResolutionReport& report) {
    return {{"level_deficit", real_vector_to_json(report.level_deficit)},
            {"max_offdiagonal", report.max_offdiagonal},
            {"n_eff", report.n_eff}};
}

}  // namespace qdopt
