#pragma once

// JSON and CSV emission. Doubles go to JSON at round-trip precision;
// non-finite values (an infinite gap, say) become null. CSV files carry a
// header row and %.12e values.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fermi1d/grid.hpp"
#include "fermi1d/inversion.hpp"
#include "fermi1d/kohn_sham.hpp"
#include "fermi1d/representability.hpp"
#include "fermi1d/scenarios.hpp"
#include "fermi1d/single_particle.hpp"

namespace fermi1d {

using Json = nlohmann::json;

/// {"n_cells": n, "values": [...]}
Json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const Json& j);

/// {"kind": "zero"}, {"kind": "convolution", "samples": [...]} or
/// {"kind": "general", "n_cells": n, "values": [[...], ...]} (row-major).
Json to_json(const Interaction& w);
Interaction interaction_from_json(const Json& j);

Json to_json(const ExternalPotential& v);
Json to_json(const EigenSolution& s);
Json to_json(const RepresentabilityReport& r);
Json to_json(const InversionResult& r);
Json to_json(const FunctionalValue& f);
Json to_json(const KSResult& r);
Json to_json(const Check& c);
Json to_json(const ScenarioReport& r);

/// Column table for CSV emission.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // equal lengths
};

Table nodal_table(const Grid& g, const std::vector<std::pair<std::string, const GridFunction*>>& columns);
Table residual_table(const InversionResult& r);
Table trace_table(const KSResult& r);

void write_csv(std::ostream& os, const Table& t);
void write_csv(const std::string& path, const Table& t);

}  // namespace fermi1d
