#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fragtree/fixedpoint.hpp"
#include "fragtree/renewal.hpp"
#include "fragtree/simulate.hpp"
#include "fragtree/spectral.hpp"
#include "fragtree/stats.hpp"

namespace fragtree {

std::string version();

/// Complex numbers serialise as {"re": .., "im": ..}.
nlohmann::json complex_to_json(Complex z);

nlohmann::json spectrum_to_json(const Spectrum& spectrum);
nlohmann::json phase_to_json(const PhaseReport& report);
nlohmann::json model_to_json(const MomentModel& model);
nlohmann::json ensemble_to_json(const SimulationEnsemble& ensemble);
nlohmann::json certificate_to_json(const ContractionCertificate& certificate);
nlohmann::json record_to_json(const TestRecord& record);
nlohmann::json verification_to_json(const VerificationReport& report);

/// Header block embedded in every output: tool version, law config and its
/// hash, and the seeds used.
nlohmann::json stamp(const SplitLaw& law, const std::vector<std::uint64_t>& seeds);

/// CSV columns x,n,mean,var,m3,m4,stderr; one row per ensemble.
void write_ensemble_csv(std::ostream& out, const std::vector<SimulationEnsemble>& ensembles);

/// CSV columns t,x,value,error_estimate.
void write_renewal_csv(std::ostream& out, const RenewalSolution& solution);

/// CSV columns re,im.
void write_fixed_point_csv(std::ostream& out, const EmpiricalComplexMeasure& measure);

/// Raw values file: 8-byte magic "FTRAW001", uint64 count, then count
/// IEEE-754 binary64 values, all little-endian.
void write_raw_values(const std::string& path, const std::vector<double>& values);
std::vector<double> read_raw_values(const std::string& path);

}  // namespace fragtree
