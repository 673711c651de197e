#include "metamodel/trace.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <ostream>

#include <json.hpp>

#include "metamodel/error.hpp"
#include "metamodel/serialization.hpp"

namespace metamodel {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void cap_samples(std::vector<std::uint64_t>& samples) {
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  if (samples.size() > ValueFingerprint::kMaxSamples) {
    samples.resize(ValueFingerprint::kMaxSamples);
  }
}

void require_same_kind(const ValueFingerprint& a, const ValueFingerprint& b) {
  if (a.kind != b.kind) {
    throw KindMismatch("fingerprint kinds differ: " + to_string(a.kind) + " vs " +
                       to_string(b.kind));
  }
}

ValueFingerprint parse_fingerprint(const json& j, std::size_t line) {
  try {
    return fingerprint_from_json(j);
  } catch (const FormatError& e) {
    throw MalformedRecord(line, e.what());
  }
}

std::vector<std::string> string_array(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) throw MalformedRecord(line, std::string("'") + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) {
      throw MalformedRecord(line, std::string("'") + field + "' must contain strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

ValueFingerprint ValueFingerprint::numeric(double lo, double hi) {
  return {FingerprintKind::NumericInterval, lo, hi, {}};
}

ValueFingerprint ValueFingerprint::length(double lo, double hi) {
  return {FingerprintKind::LengthInterval, lo, hi, {}};
}

ValueFingerprint ValueFingerprint::hashes(std::vector<std::uint64_t> samples) {
  cap_samples(samples);
  return {FingerprintKind::HashSample, 0.0, 0.0, std::move(samples)};
}

std::string to_string(FingerprintKind kind) {
  switch (kind) {
    case FingerprintKind::NumericInterval:
      return "NumericInterval";
    case FingerprintKind::LengthInterval:
      return "LengthInterval";
    case FingerprintKind::HashSample:
      return "HashSample";
  }
  return "?";
}

ValueFingerprint merge_fingerprints(const ValueFingerprint& a, const ValueFingerprint& b) {
  require_same_kind(a, b);
  ValueFingerprint out;
  out.kind = a.kind;
  if (a.is_interval()) {
    out.lo = std::min(a.lo, b.lo);
    out.hi = std::max(a.hi, b.hi);
    return out;
  }
  out.samples.reserve(a.samples.size() + b.samples.size());
  std::set_union(a.samples.begin(), a.samples.end(), b.samples.begin(), b.samples.end(),
                 std::back_inserter(out.samples));
  cap_samples(out.samples);
  return out;
}

bool fingerprints_disjoint(const ValueFingerprint& a, const ValueFingerprint& b) {
  require_same_kind(a, b);
  if (a.is_interval()) return a.hi < b.lo || b.hi < a.lo;
  if (a.samples.empty() || b.samples.empty()) return false;
  // Both sorted.
  auto i = a.samples.begin();
  auto j = b.samples.begin();
  while (i != a.samples.end() && j != b.samples.end()) {
    if (*i == *j) return false;
    if (*i < *j) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

CallRecord parse_record(const std::string& line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw MalformedRecord(line_number, "record must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "fn" && key != "args" && key != "ret" && key != "afp" && key != "rfp") {
      throw MalformedRecord(line_number, "unknown field '" + key + "'");
    }
  }
  for (const char* key : {"fn", "args", "ret"}) {
    if (!j.contains(key)) throw MalformedRecord(line_number, std::string("missing field '") + key + "'");
  }
  if (!j["fn"].is_string()) throw MalformedRecord(line_number, "'fn' must be a string");
  if (!j["ret"].is_string()) throw MalformedRecord(line_number, "'ret' must be a string");

  CallRecord rec;
  rec.function_name = j["fn"].get<std::string>();
  rec.arg_types = string_array(j["args"], "args", line_number);
  rec.return_type = j["ret"].get<std::string>();
  rec.sequence_index = line_number;
  if (rec.function_name.empty()) throw MalformedRecord(line_number, "'fn' is empty");

  if (j.contains("afp")) {
    const auto& afp = j["afp"];
    if (!afp.is_array()) throw MalformedRecord(line_number, "'afp' must be an array");
    if (afp.size() != rec.arg_types.size()) {
      throw MalformedRecord(line_number, "'afp' has " + std::to_string(afp.size()) +
                                             " fingerprints for " +
                                             std::to_string(rec.arg_types.size()) + " arguments");
    }
    std::vector<ValueFingerprint> fps;
    for (const auto& fp : afp) fps.push_back(parse_fingerprint(fp, line_number));
    rec.arg_fingerprints = std::move(fps);
  }
  if (j.contains("rfp")) rec.return_fingerprint = parse_fingerprint(j["rfp"], line_number);
  return rec;
}

Trace ingest_trace(std::istream& in, std::string source_label) {
  Trace trace;
  trace.source_label = std::move(source_label);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    trace.records.push_back(parse_record(line, line_number));
  }
  if (in.bad()) throw IoError("read error in trace " + trace.source_label);
  return trace;
}

Trace ingest_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path.string());
  return ingest_trace(in, path.filename().string());
}

std::string serialize_record(const CallRecord& record) {
  ordered_json j;
  j["fn"] = record.function_name;
  j["args"] = record.arg_types;
  j["ret"] = record.return_type;
  if (record.arg_fingerprints) {
    ordered_json afp = ordered_json::array();
    for (const auto& fp : *record.arg_fingerprints) afp.push_back(to_json(fp));
    j["afp"] = std::move(afp);
  }
  if (record.return_fingerprint) j["rfp"] = to_json(*record.return_fingerprint);
  return j.dump();
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& r : trace.records) out << serialize_record(r) << '\n';
}

}  // namespace metamodel
