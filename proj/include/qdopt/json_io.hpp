#pragma once

#include <nlohmann/json_fwd.hpp>

#include "qdopt/bayes.hpp"
#include "qdopt/measurement.hpp"
#include "qdopt/shannon.hpp"

namespace qdopt {

using nlohmann::json;

json complex_to_json(Complex z);    // [re, im]
Complex complex_from_json(const json& j);

// {dim, labels, weights, elements as nested [re, im] arrays}. Round trips are
// bit exact; rank-one storage is materialized on save.
json povm_to_json(const DiscretePOVM& povm);
DiscretePOVM povm_from_json(const json& j);

json ensemble_to_json(const HypothesisEnsemble& ensemble);
HypothesisEnsemble ensemble_from_json(const json& j);

// Reports carry every residual and eigenvalue so verdicts can be re-asserted
// offline without recomputation.
json optimality_report_to_json(const OptimalityReport& report);
json ml_certificate_to_json(const MlCertificate& cert);
json info_estimate_to_json(const InfoEstimate& estimate);
json variation_report_to_json(const VariationReport& report);
json local_certificate_to_json(const LocalOptimalityCertificate& cert);
json occupation_check_to_json(const OccupationCheck& check);
json identity_report_to_json(const IdentityResolutionReport& report);

}  // namespace qdopt
