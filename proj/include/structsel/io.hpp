// File formats: registry lists, rule files, dictionaries (NDJSON and binary),
// grouping JSON, design CSV.
#pragma once

#include <iosfwd>
#include <string>

#include "structsel/grouping.hpp"
#include "structsel/model.hpp"

namespace structsel {

// One variable name per line; '#' starts a comment. Bundles: names on the
// same line separated by commas form an atomic dummy block.
RegistryPtr read_registry(std::istream& in);
RegistryPtr read_registry_file(const std::string& path);
void write_registry(std::ostream& out, const RegistryPtr& reg);

// Newline-delimited JSON: each line is an array of member names, one per
// dictionary entry, in canonical mask order.
void write_dictionary_ndjson(std::ostream& out, const Dictionary& d);
Dictionary read_dictionary_ndjson(std::istream& in, const RegistryPtr& reg);

// Compact binary form: magic, version, registry content hash, count, then
// little-endian 64-bit masks. Reading against a registry with a different
// hash throws RegistryMismatch.
void write_dictionary_binary(std::ostream& out, const Dictionary& d);
Dictionary read_dictionary_binary(std::istream& in, const RegistryPtr& reg);

// JSON array of {"name": ..., "members": [...], "weight": ...}; weight is
// optional and defaults to sqrt(|members|).
void write_grouping(std::ostream& out, const GroupingStructure& g);
GroupingStructure read_grouping(std::istream& in, const RegistryPtr& reg);
GroupingStructure read_grouping_file(const std::string& path, const RegistryPtr& reg);

// CSV with a header of registry names plus one outcome column (any name not
// in the registry; by convention "y"). Values must be numeric.
void write_design_csv(std::ostream& out, const Design& design, const std::string& outcome_name);
Design read_design_csv(std::istream& in, OutcomeKind kind, const std::string& outcome_name = "");
Design read_design_csv_file(const std::string& path, OutcomeKind kind,
                            const std::string& outcome_name = "");

std::string slurp_file(const std::string& path);

}  // namespace structsel
