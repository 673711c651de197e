#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace metamodel {

enum class FingerprintKind { NumericInterval, LengthInterval, HashSample };

/// Observed range evidence for a stream of values of one type.
///
/// Interval kinds keep the hull [lo, hi] of what was seen (scalar values for
/// NumericInterval, container lengths for LengthInterval). HashSample keeps a
/// bounded, sorted set of 64-bit value hashes; when more than
/// kMaxSamples distinct hashes are seen, the smallest kMaxSamples are kept,
/// which makes the capped set independent of observation order.
struct ValueFingerprint {
  static constexpr std::size_t kMaxSamples = 256;

  FingerprintKind kind = FingerprintKind::NumericInterval;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> samples;

  static ValueFingerprint numeric(double lo, double hi);
  static ValueFingerprint length(double lo, double hi);
  static ValueFingerprint hashes(std::vector<std::uint64_t> samples);

  bool is_interval() const noexcept { return kind != FingerprintKind::HashSample; }

  friend bool operator==(const ValueFingerprint&, const ValueFingerprint&) = default;
};

std::string to_string(FingerprintKind kind);

/// Interval hull or capped sample union. Throws KindMismatch.
ValueFingerprint merge_fingerprints(const ValueFingerprint& a, const ValueFingerprint& b);

/// Evidence that two value ranges do not intersect. Intervals are compared
/// strictly (touching endpoints overlap); sample sets are disjoint when they
/// share no hash. An empty sample set is not evidence and yields false.
/// Throws KindMismatch.
bool fingerprints_disjoint(const ValueFingerprint& a, const ValueFingerprint& b);

struct CallRecord {
  std::string function_name;
  std::vector<std::string> arg_types;
  std::string return_type;
  std::optional<std::vector<ValueFingerprint>> arg_fingerprints;
  std::optional<ValueFingerprint> return_fingerprint;
  std::size_t sequence_index = 0;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct Trace {
  std::vector<CallRecord> records;
  std::string source_label;
};

/// Parses one JSONL line. `line_number` is used for sequence_index and
/// error reporting. Throws MalformedRecord.
CallRecord parse_record(const std::string& line, std::size_t line_number);

/// Reads a JSONL trace. Blank lines are skipped; any malformed line aborts
/// with MalformedRecord naming that line.
Trace ingest_trace(std::istream& in, std::string source_label = {});
Trace ingest_trace(const std::filesystem::path& path);

/// Canonical JSONL: keys in wire order fn, args, ret, afp, rfp.
std::string serialize_record(const CallRecord& record);
void write_trace(std::ostream& out, const Trace& trace);

}  // namespace metamodel
