#pragma once

#include "confine/certifier.hpp"
#include "confine/classifier.hpp"
#include "confine/evolution.hpp"
#include "confine/magnetic.hpp"

#include <json.hpp>

namespace confine {

// JSON mirrors of the typed reports. Non-finite numbers are written as the
// strings "inf", "-inf" and "nan".
nlohmann::json json_number(double x);
nlohmann::json json_point(const Point& p);

nlohmann::json to_json(const IntegralTest& t);
nlohmann::json to_json(const TailClass& t);
nlohmann::json to_json(const L2Count& c);
nlohmann::json to_json(const EndpointAsymptotics& e);
nlohmann::json to_json(const EndpointClassification& c);
nlohmann::json to_json(const EsaVerdict& v);
nlohmann::json to_json(const ChernoffVerdict& v);
nlohmann::json to_json(const FiberVerdictTable& t);
nlohmann::json to_json(const BoundaryFieldCertificate& c);
nlohmann::json to_json(const TransitionBracket& b);
nlohmann::json to_json(const SusyResidual& r);
nlohmann::json to_json(const DiamagneticCheck& d);
nlohmann::json to_json(const CertificateReport& r);
nlohmann::json to_json(const DistanceThresholdCertificate& c);
nlohmann::json to_json(const ClassMembership& m);
nlohmann::json to_json(const MuEstimate& m);
nlohmann::json to_json(const IdentityResidual& r);
nlohmann::json to_json(const EvolutionDiagnostics& d);
nlohmann::json to_json(const ExtensionProbe& p);

}  // namespace confine
