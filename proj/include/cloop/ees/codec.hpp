#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cloop/ees/types.hpp"

namespace cloop::ees {

enum class CodecErrorKind { MalformedJson, SchemaViolation, UnknownEnumToken, InvariantViolation };

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrorKind kind, std::string field, const std::string& detail)
      : std::runtime_error(detail.empty() ? field : field + ": " + detail),
        kind_(kind),
        field_(std::move(field)) {}

  CodecErrorKind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  CodecErrorKind kind_;
  std::string field_;
};

// Validation of type invariants; throws CodecError(InvariantViolation).
void validate(const ReportingMode& m);
void validate(const SubscriptionRequest& r);
void validate(const SubscriptionResponse& r);
void validate(const VolumeMeasurement& v);
void validate(const ThroughputMeasurement& t);
void validate(const ThroughputStatisticsMeasurement& t);
void validate(const UsageMeasurementItem& item);
void validate(const Notification& n);

// Strict decode: unknown top-level fields ignored, unknown enum tokens and
// invariant violations rejected. Encode emits canonical JSON (sorted keys,
// no whitespace) with the exact wire field names.
SubscriptionRequest decode_subscription_request(std::string_view raw);
std::string encode_subscription_request(const SubscriptionRequest& r);
SubscriptionResponse decode_subscription_response(std::string_view raw);
std::string encode_subscription_response(const SubscriptionResponse& r);
Notification decode_notification(std::string_view raw);
std::string encode_notification(const Notification& n);

/// The flow description embedded in `packFiltId` ({"SrcIp":...,"DstIp":...,
/// "SrcPort":...,"DstPort":...}); source is the UE side of the normalized key.
std::string make_pack_filt_id(const FlowKey& key);

struct PackFiltFields {
  std::string srcIp;
  std::string dstIp;
  uint16_t srcPort = 0;
  uint16_t dstPort = 0;
};
std::optional<PackFiltFields> parse_pack_filt_id(const std::string& packFiltId);

}  // namespace cloop::ees
