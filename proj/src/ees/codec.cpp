#include "cloop/ees/codec.hpp"

#include <json.hpp>

#include "cloop/util/ipv4.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::ees {

using nlohmann::json;
using util::format_rfc3339;
using util::parse_rfc3339;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& detail) {
  throw CodecError(CodecErrorKind::SchemaViolation, field, detail);
}

[[noreturn]] void enum_error(const std::string& field, const std::string& token) {
  throw CodecError(CodecErrorKind::UnknownEnumToken, field, "unknown token '" + token + "'");
}

[[noreturn]] void invariant_error(const std::string& field, const std::string& detail) {
  throw CodecError(CodecErrorKind::InvariantViolation, field, detail);
}

json parse_json(std::string_view raw) {
  json j = json::parse(raw, nullptr, false);
  if (j.is_discarded()) {
    throw CodecError(CodecErrorKind::MalformedJson, "", "not valid JSON");
  }
  return j;
}

const json* opt_field(const json& o, const char* name) {
  auto it = o.find(name);
  if (it == o.end() || it->is_null()) return nullptr;
  return &*it;
}

const json& req_field(const json& o, const std::string& field, const char* name) {
  auto it = o.find(name);
  if (it == o.end() || it->is_null()) schema_error(field, "missing field");
  return *it;
}

std::string req_string(const json& o, const std::string& field, const char* name) {
  const json& v = req_field(o, field, name);
  if (!v.is_string()) schema_error(field, "expected string");
  return v.get<std::string>();
}

uint64_t as_uint(const json& v, const std::string& field) {
  if (!v.is_number_integer()) schema_error(field, "expected non-negative integer");
  if (!v.is_number_unsigned() && v.get<int64_t>() < 0) schema_error(field, "negative");
  return v.get<uint64_t>();
}

double as_nonneg_number(const json& v, const std::string& field) {
  if (!v.is_number()) schema_error(field, "expected number");
  double d = v.get<double>();
  if (d < 0) schema_error(field, "negative");
  return d;
}

util::SysTime as_timestamp(const json& v, const std::string& field) {
  if (!v.is_string()) schema_error(field, "expected RFC 3339 string");
  try {
    return parse_rfc3339(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    schema_error(field, e.what());
  }
}

std::string check_ipv4(const std::string& s, const std::string& field) {
  if (!util::is_ipv4(s)) schema_error(field, "not a dotted-quad IPv4 address");
  return s;
}

// --- SnssaiId ---

SnssaiId decode_snssai(const json& v, const std::string& field) {
  if (!v.is_object()) schema_error(field, "expected object");
  SnssaiId out;
  const json& sst = req_field(v, field + ".sst", "sst");
  if (!sst.is_number_integer()) schema_error(field + ".sst", "expected integer");
  int64_t val = sst.get<int64_t>();
  if (val < 0 || val > 255) schema_error(field + ".sst", "out of range 0..255");
  out.sst = static_cast<int>(val);
  if (const json* sd = opt_field(v, "sd")) {
    if (!sd->is_string()) schema_error(field + ".sd", "expected string");
    std::string s = sd->get<std::string>();
    // wire samples carry 5 hex chars in places; accept 5-or-6, store 6
    if (s.size() == 5) s.insert(s.begin(), '0');
    if (!valid_snssai_sd(s)) schema_error(field + ".sd", "expected 5 or 6 hex digits");
    out.sd = s;
  }
  return out;
}

json encode_snssai(const SnssaiId& s) { return json{{"sst", s.sst}, {"sd", s.sd}}; }

// --- ReportingMode ---

ReportingMode decode_reporting(const json& v) {
  if (!v.is_object()) schema_error("reporting", "expected object");
  ReportingMode out;
  const json& period = req_field(v, "reporting.periodSeconds", "periodSeconds");
  if (!period.is_number_integer() || period.get<int64_t>() < 1) {
    schema_error("reporting.periodSeconds", "expected integer >= 1");
  }
  out.periodSeconds = period.get<uint32_t>();
  if (const json* mr = opt_field(v, "maxReports")) {
    if (!mr->is_number_integer() || mr->get<int64_t>() < 1) {
      schema_error("reporting.maxReports", "expected integer >= 1");
    }
    out.maxReports = mr->get<uint32_t>();
  }
  if (const json* ex = opt_field(v, "expiry")) {
    out.expiry = as_timestamp(*ex, "reporting.expiry");
  }
  return out;
}

json encode_reporting(const ReportingMode& m) {
  json j{{"periodSeconds", m.periodSeconds}};
  if (m.maxReports) j["maxReports"] = *m.maxReports;
  if (m.expiry) j["expiry"] = format_rfc3339(*m.expiry);
  return j;
}

// --- measurement bodies ---

VolumeMeasurement decode_volume(const json& v, const std::string& field) {
  if (!v.is_object()) schema_error(field, "expected object");
  VolumeMeasurement out;
  out.totalVolume = as_uint(req_field(v, field + ".totalVolume", "totalVolume"), field + ".totalVolume");
  out.ulVolume = as_uint(req_field(v, field + ".ulVolume", "ulVolume"), field + ".ulVolume");
  out.dlVolume = as_uint(req_field(v, field + ".dlVolume", "dlVolume"), field + ".dlVolume");
  out.totalNbOfPackets =
      as_uint(req_field(v, field + ".totalNbOfPackets", "totalNbOfPackets"), field + ".totalNbOfPackets");
  out.ulNbOfPackets =
      as_uint(req_field(v, field + ".ulNbOfPackets", "ulNbOfPackets"), field + ".ulNbOfPackets");
  out.dlNbOfPackets =
      as_uint(req_field(v, field + ".dlNbOfPackets", "dlNbOfPackets"), field + ".dlNbOfPackets");
  if (out.totalVolume != out.ulVolume + out.dlVolume) {
    schema_error(field + ".totalVolume", "totalVolume != ulVolume + dlVolume");
  }
  if (out.totalNbOfPackets != out.ulNbOfPackets + out.dlNbOfPackets) {
    schema_error(field + ".totalNbOfPackets", "totalNbOfPackets != ulNbOfPackets + dlNbOfPackets");
  }
  return out;
}

json encode_volume(const VolumeMeasurement& v) {
  return json{{"totalVolume", v.totalVolume},
              {"ulVolume", v.ulVolume},
              {"dlVolume", v.dlVolume},
              {"totalNbOfPackets", v.totalNbOfPackets},
              {"ulNbOfPackets", v.ulNbOfPackets},
              {"dlNbOfPackets", v.dlNbOfPackets}};
}

ThroughputMeasurement decode_throughput(const json& v, const std::string& field) {
  if (!v.is_object()) schema_error(field, "expected object");
  ThroughputMeasurement out;
  out.ulThroughput =
      as_nonneg_number(req_field(v, field + ".ulThroughput", "ulThroughput"), field + ".ulThroughput");
  out.dlThroughput =
      as_nonneg_number(req_field(v, field + ".dlThroughput", "dlThroughput"), field + ".dlThroughput");
  return out;
}

json encode_throughput(const ThroughputMeasurement& t) {
  return json{{"ulThroughput", t.ulThroughput}, {"dlThroughput", t.dlThroughput}};
}

ThroughputStatisticsMeasurement decode_throughput_stats(const json& v, const std::string& field) {
  if (!v.is_object()) schema_error(field, "expected object");
  ThroughputStatisticsMeasurement out;
  out.ulAverage = as_nonneg_number(req_field(v, field + ".ulAverage", "ulAverage"), field + ".ulAverage");
  out.ulPeak = as_nonneg_number(req_field(v, field + ".ulPeak", "ulPeak"), field + ".ulPeak");
  out.dlAverage = as_nonneg_number(req_field(v, field + ".dlAverage", "dlAverage"), field + ".dlAverage");
  out.dlPeak = as_nonneg_number(req_field(v, field + ".dlPeak", "dlPeak"), field + ".dlPeak");
  if (out.ulPeak < out.ulAverage || out.dlPeak < out.dlAverage) {
    schema_error(field, "peak < average");
  }
  return out;
}

json encode_throughput_stats(const ThroughputStatisticsMeasurement& t) {
  return json{{"ulAverage", t.ulAverage},
              {"ulPeak", t.ulPeak},
              {"dlAverage", t.dlAverage},
              {"dlPeak", t.dlPeak}};
}

UsageMeasurementItem decode_item(const json& v, const std::string& field) {
  if (!v.is_object()) schema_error(field, "expected object");
  UsageMeasurementItem out;
  if (const json* fi = opt_field(v, "flowInfo")) {
    if (!fi->is_object()) schema_error(field + ".flowInfo", "expected object");
    FlowInfo info;
    info.packFiltId = req_string(*fi, field + ".flowInfo.packFiltId", "packFiltId");
    std::string dir = req_string(*fi, field + ".flowInfo.fDir", "fDir");
    auto d = flow_direction_from_token(dir);
    if (!d) enum_error(field + ".flowInfo.fDir", dir);
    info.fDir = *d;
    out.flowInfo = std::move(info);
  }
  if (const json* vm = opt_field(v, "volumeMeasurement")) {
    out.volumeMeasurement = decode_volume(*vm, field + ".volumeMeasurement");
  }
  if (const json* tm = opt_field(v, "throughputMeasurement")) {
    out.throughputMeasurement = decode_throughput(*tm, field + ".throughputMeasurement");
  }
  if (const json* ts = opt_field(v, "throughputStatisticsMeasurement")) {
    out.throughputStatisticsMeasurement =
        decode_throughput_stats(*ts, field + ".throughputStatisticsMeasurement");
  }
  if (!out.volumeMeasurement && !out.throughputMeasurement &&
      !out.throughputStatisticsMeasurement) {
    schema_error(field, "at least one measurement required");
  }
  return out;
}

json encode_item(const UsageMeasurementItem& item) {
  json j = json::object();
  if (item.flowInfo) {
    j["flowInfo"] =
        json{{"packFiltId", item.flowInfo->packFiltId}, {"fDir", to_token(item.flowInfo->fDir)}};
  }
  if (item.volumeMeasurement) j["volumeMeasurement"] = encode_volume(*item.volumeMeasurement);
  if (item.throughputMeasurement) {
    j["throughputMeasurement"] = encode_throughput(*item.throughputMeasurement);
  }
  if (item.throughputStatisticsMeasurement) {
    j["throughputStatisticsMeasurement"] =
        encode_throughput_stats(*item.throughputStatisticsMeasurement);
  }
  return j;
}

json encode_filters(const SubscriptionFilters& f) {
  json j = json::object();
  if (f.dnn) j["dnn"] = *f.dnn;
  if (f.snssai) j["snssai"] = encode_snssai(*f.snssai);
  if (f.ueIpv4Addr) j["ueIpv4Addr"] = *f.ueIpv4Addr;
  return j;
}

SubscriptionFilters decode_filters(const json& v) {
  if (!v.is_object()) schema_error("filters", "expected object");
  SubscriptionFilters out;
  if (const json* d = opt_field(v, "dnn")) {
    if (!d->is_string()) schema_error("filters.dnn", "expected string");
    out.dnn = d->get<std::string>();
  }
  if (const json* s = opt_field(v, "snssai")) out.snssai = decode_snssai(*s, "filters.snssai");
  if (const json* u = opt_field(v, "ueIpv4Addr")) {
    if (!u->is_string()) schema_error("filters.ueIpv4Addr", "expected string");
    out.ueIpv4Addr = check_ipv4(u->get<std::string>(), "filters.ueIpv4Addr");
  }
  return out;
}

json request_to_json(const SubscriptionRequest& r) {
  json events = json::array();
  for (EventType e : r.eventTypes) events.push_back(to_token(e));
  json measures = json::array();
  for (MeasurementType m : r.measurementTypes) measures.push_back(to_token(m));
  json j{{"eventTypes", events},
         {"measurementTypes", measures},
         {"granularity", to_token(r.granularity)},
         {"reporting", encode_reporting(r.reporting)},
         {"notifyUri", r.notifyUri}};
  if (r.filters) j["filters"] = encode_filters(*r.filters);
  return j;
}

SubscriptionRequest request_from_json(const json& j) {
  if (!j.is_object()) schema_error("", "expected object");
  SubscriptionRequest out;
  const json& events = req_field(j, "eventTypes", "eventTypes");
  if (!events.is_array()) schema_error("eventTypes", "expected array");
  for (const json& e : events) {
    if (!e.is_string()) schema_error("eventTypes", "expected string tokens");
    auto ev = event_type_from_token(e.get<std::string>());
    if (!ev) enum_error("eventTypes", e.get<std::string>());
    out.eventTypes.insert(*ev);
  }
  if (out.eventTypes.empty()) schema_error("eventTypes", "must be non-empty");
  if (const json* measures = opt_field(j, "measurementTypes")) {
    if (!measures->is_array()) schema_error("measurementTypes", "expected array");
    for (const json& m : *measures) {
      if (!m.is_string()) schema_error("measurementTypes", "expected string tokens");
      auto mt = measurement_type_from_token(m.get<std::string>());
      if (!mt) enum_error("measurementTypes", m.get<std::string>());
      out.measurementTypes.insert(*mt);
    }
  }
  std::string gran = req_string(j, "granularity", "granularity");
  auto g = granularity_from_token(gran);
  if (!g) enum_error("granularity", gran);
  out.granularity = *g;
  out.reporting = decode_reporting(req_field(j, "reporting", "reporting"));
  out.notifyUri = req_string(j, "notifyUri", "notifyUri");
  if (!util::parse_http_uri(out.notifyUri)) {
    schema_error("notifyUri", "expected absolute http URI");
  }
  if (const json* f = opt_field(j, "filters")) out.filters = decode_filters(*f);
  return out;
}

json notification_to_json(const Notification& n) {
  json items = json::array();
  for (const UsageMeasurementItem& item : n.userDataUsageMeasurements) {
    items.push_back(encode_item(item));
  }
  return json{{"subscriptionId", n.subscriptionId},
              {"eventType", to_token(n.eventType)},
              {"ueIpv4Addr", n.ueIpv4Addr},
              {"snssai", encode_snssai(n.snssai)},
              {"timeStamp", format_rfc3339(n.timeStamp)},
              {"startTime", format_rfc3339(n.startTime)},
              {"userDataUsageMeasurements", items}};
}

}  // namespace

void validate(const ReportingMode& m) {
  if (m.periodSeconds < 1) invariant_error("reporting.periodSeconds", "must be >= 1");
  if (m.maxReports && *m.maxReports < 1) invariant_error("reporting.maxReports", "must be >= 1");
}

void validate(const SubscriptionRequest& r) {
  if (r.eventTypes.empty()) invariant_error("eventTypes", "must be non-empty");
  validate(r.reporting);
  if (!util::parse_http_uri(r.notifyUri)) invariant_error("notifyUri", "not an absolute http URI");
  if (r.filters && r.filters->snssai && !valid_snssai_sd(r.filters->snssai->sd)) {
    invariant_error("filters.snssai.sd", "expected 6 hex digits");
  }
  if (r.filters && r.filters->ueIpv4Addr && !util::is_ipv4(*r.filters->ueIpv4Addr)) {
    invariant_error("filters.ueIpv4Addr", "not IPv4");
  }
}

void validate(const SubscriptionResponse& r) {
  if (r.subscriptionId.empty()) invariant_error("subscriptionId", "must be non-empty");
  validate(r.accepted);
}

void validate(const VolumeMeasurement& v) {
  if (v.totalVolume != v.ulVolume + v.dlVolume) {
    invariant_error("volumeMeasurement", "volume additivity violated");
  }
  if (v.totalNbOfPackets != v.ulNbOfPackets + v.dlNbOfPackets) {
    invariant_error("volumeMeasurement", "packet additivity violated");
  }
}

void validate(const ThroughputMeasurement& t) {
  if (t.ulThroughput < 0 || t.dlThroughput < 0) invariant_error("throughputMeasurement", "negative");
}

void validate(const ThroughputStatisticsMeasurement& t) {
  if (t.ulAverage < 0 || t.dlAverage < 0) {
    invariant_error("throughputStatisticsMeasurement", "negative average");
  }
  if (t.ulPeak < t.ulAverage || t.dlPeak < t.dlAverage) {
    invariant_error("throughputStatisticsMeasurement", "peak < average");
  }
}

void validate(const UsageMeasurementItem& item) {
  if (!item.volumeMeasurement && !item.throughputMeasurement &&
      !item.throughputStatisticsMeasurement) {
    invariant_error("userDataUsageMeasurements", "item carries no measurement");
  }
  if (item.volumeMeasurement) validate(*item.volumeMeasurement);
  if (item.throughputMeasurement) validate(*item.throughputMeasurement);
  if (item.throughputStatisticsMeasurement) validate(*item.throughputStatisticsMeasurement);
}

void validate(const Notification& n) {
  if (!util::is_ipv4(n.ueIpv4Addr)) invariant_error("ueIpv4Addr", "not IPv4");
  if (!valid_snssai_sd(n.snssai.sd)) invariant_error("snssai.sd", "expected 6 hex digits");
  if (n.snssai.sst < 0 || n.snssai.sst > 255) invariant_error("snssai.sst", "out of range");
  if (n.timeStamp < n.startTime) invariant_error("timeStamp", "timeStamp before startTime");
  for (const UsageMeasurementItem& item : n.userDataUsageMeasurements) validate(item);
}

SubscriptionRequest decode_subscription_request(std::string_view raw) {
  return request_from_json(parse_json(raw));
}

std::string encode_subscription_request(const SubscriptionRequest& r) {
  validate(r);
  return request_to_json(r).dump();
}

SubscriptionResponse decode_subscription_response(std::string_view raw) {
  json j = parse_json(raw);
  if (!j.is_object()) schema_error("", "expected object");
  SubscriptionResponse out;
  out.subscriptionId = req_string(j, "subscriptionId", "subscriptionId");
  if (out.subscriptionId.empty()) schema_error("subscriptionId", "must be non-empty");
  out.accepted = request_from_json(req_field(j, "accepted", "accepted"));
  return out;
}

std::string encode_subscription_response(const SubscriptionResponse& r) {
  validate(r);
  return json{{"subscriptionId", r.subscriptionId}, {"accepted", request_to_json(r.accepted)}}
      .dump();
}

Notification decode_notification(std::string_view raw) {
  json j = parse_json(raw);
  if (!j.is_object()) schema_error("", "expected object");
  Notification out;
  out.subscriptionId = req_string(j, "subscriptionId", "subscriptionId");
  std::string ev = req_string(j, "eventType", "eventType");
  auto e = event_type_from_token(ev);
  if (!e) enum_error("eventType", ev);
  out.eventType = *e;
  out.ueIpv4Addr = check_ipv4(req_string(j, "ueIpv4Addr", "ueIpv4Addr"), "ueIpv4Addr");
  out.snssai = decode_snssai(req_field(j, "snssai", "snssai"), "snssai");
  out.timeStamp = as_timestamp(req_field(j, "timeStamp", "timeStamp"), "timeStamp");
  out.startTime = as_timestamp(req_field(j, "startTime", "startTime"), "startTime");
  if (out.timeStamp < out.startTime) schema_error("timeStamp", "timeStamp before startTime");
  const json& items = req_field(j, "userDataUsageMeasurements", "userDataUsageMeasurements");
  if (!items.is_array()) schema_error("userDataUsageMeasurements", "expected array");
  size_t idx = 0;
  for (const json& item : items) {
    out.userDataUsageMeasurements.push_back(
        decode_item(item, "userDataUsageMeasurements[" + std::to_string(idx) + "]"));
    ++idx;
  }
  return out;
}

std::string encode_notification(const Notification& n) {
  validate(n);
  return notification_to_json(n).dump();
}

std::string make_pack_filt_id(const FlowKey& key) {
  return json{{"SrcIp", key.srcIp},
              {"DstIp", key.dstIp},
              {"SrcPort", key.srcPort},
              {"DstPort", key.dstPort}}
      .dump();
}

std::optional<PackFiltFields> parse_pack_filt_id(const std::string& packFiltId) {
  json j = json::parse(packFiltId, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto src = j.find("SrcIp");
  auto dst = j.find("DstIp");
  if (src == j.end() || dst == j.end() || !src->is_string() || !dst->is_string()) {
    return std::nullopt;
  }
  PackFiltFields out;
  out.srcIp = src->get<std::string>();
  out.dstIp = dst->get<std::string>();
  if (!util::is_ipv4(out.srcIp) || !util::is_ipv4(out.dstIp)) return std::nullopt;
  auto sp = j.find("SrcPort");
  auto dp = j.find("DstPort");
  if (sp != j.end() && sp->is_number_unsigned()) out.srcPort = sp->get<uint16_t>();
  if (dp != j.end() && dp->is_number_unsigned()) out.dstPort = dp->get<uint16_t>();
  return out;
}

}  // namespace cloop::ees
