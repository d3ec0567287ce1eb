#include "cloop/nwdaf/types.hpp"

#include <json.hpp>

#include "cloop/ees/codec.hpp"
#include "cloop/util/ipv4.hpp"
#include "cloop/util/uri.hpp"

namespace cloop::nwdaf {

using ees::CodecError;
using ees::CodecErrorKind;
using nlohmann::json;

const char* to_token(AnalyticsEventId v) {
  switch (v) {
    case AnalyticsEventId::AbnormalBehaviour: return "ABNORMAL_BEHAVIOUR";
  }
  return "?";
}

const char* to_token(ExceptionId v) {
  switch (v) {
    case ExceptionId::SuspicionOfDdosAttack: return "SUSPICION_OF_DDOS_ATTACK";
    case ExceptionId::TooFrequentServiceAccess: return "TOO_FREQUENT_SERVICE_ACCESS";
    case ExceptionId::UnexpectedUeLocation: return "UNEXPECTED_UE_LOCATION";
    case ExceptionId::UnexpectedRadioLinkFailures: return "UNEXPECTED_RADIO_LINK_FAILURES";
  }
  return "?";
}

std::optional<AnalyticsEventId> analytics_event_from_token(const std::string& s) {
  if (s == "ABNORMAL_BEHAVIOUR") return AnalyticsEventId::AbnormalBehaviour;
  return std::nullopt;
}

std::optional<ExceptionId> exception_from_token(const std::string& s) {
  if (s == "SUSPICION_OF_DDOS_ATTACK") return ExceptionId::SuspicionOfDdosAttack;
  if (s == "TOO_FREQUENT_SERVICE_ACCESS") return ExceptionId::TooFrequentServiceAccess;
  if (s == "UNEXPECTED_UE_LOCATION") return ExceptionId::UnexpectedUeLocation;
  if (s == "UNEXPECTED_RADIO_LINK_FAILURES") return ExceptionId::UnexpectedRadioLinkFailures;
  return std::nullopt;
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& detail) {
  throw CodecError(CodecErrorKind::SchemaViolation, field, detail);
}

json parse_object(std::string_view raw) {
  json j = json::parse(raw, nullptr, false);
  if (j.is_discarded()) throw CodecError(CodecErrorKind::MalformedJson, "", "not valid JSON");
  if (!j.is_object()) schema_error("", "expected object");
  return j;
}

}  // namespace

AnalyticsSubscription decode_analytics_subscription(std::string_view raw) {
  json j = parse_object(raw);
  AnalyticsSubscription out;
  if (j.contains("subscriptionId") && j["subscriptionId"].is_string()) {
    out.subscriptionId = j["subscriptionId"].get<std::string>();
  }
  if (!j.contains("eventId") || !j["eventId"].is_string()) schema_error("eventId", "missing");
  auto ev = analytics_event_from_token(j["eventId"].get<std::string>());
  if (!ev) {
    throw CodecError(CodecErrorKind::UnknownEnumToken, "eventId",
                     "unknown token '" + j["eventId"].get<std::string>() + "'");
  }
  out.eventId = *ev;
  if (j.contains("exceptionIds") && !j["exceptionIds"].is_null()) {
    if (!j["exceptionIds"].is_array()) schema_error("exceptionIds", "expected array");
    std::set<ExceptionId> ids;
    for (const json& e : j["exceptionIds"]) {
      if (!e.is_string()) schema_error("exceptionIds", "expected string tokens");
      auto ex = exception_from_token(e.get<std::string>());
      if (!ex) {
        throw CodecError(CodecErrorKind::UnknownEnumToken, "exceptionIds",
                         "unknown token '" + e.get<std::string>() + "'");
      }
      ids.insert(*ex);
    }
    out.exceptionIds = std::move(ids);
  }
  if (!j.contains("notifyUri") || !j["notifyUri"].is_string()) schema_error("notifyUri", "missing");
  out.notifyUri = j["notifyUri"].get<std::string>();
  if (!util::parse_http_uri(out.notifyUri)) schema_error("notifyUri", "expected absolute http URI");
  if (!j.contains("periodSeconds") || !j["periodSeconds"].is_number_integer() ||
      j["periodSeconds"].get<int64_t>() < 1) {
    schema_error("periodSeconds", "expected integer >= 1");
  }
  out.periodSeconds = j["periodSeconds"].get<uint32_t>();
  return out;
}

std::string encode_analytics_subscription(const AnalyticsSubscription& s) {
  json j{{"eventId", to_token(s.eventId)},
         {"notifyUri", s.notifyUri},
         {"periodSeconds", s.periodSeconds}};
  if (!s.subscriptionId.empty()) j["subscriptionId"] = s.subscriptionId;
  if (s.exceptionIds) {
    json ids = json::array();
    for (ExceptionId e : *s.exceptionIds) ids.push_back(to_token(e));
    j["exceptionIds"] = ids;
  }
  return j.dump();
}

AbnormalBehaviourNotification decode_abnormal_notification(std::string_view raw) {
  json j = parse_object(raw);
  AbnormalBehaviourNotification out;
  if (!j.contains("subscriptionId") || !j["subscriptionId"].is_string()) {
    schema_error("subscriptionId", "missing");
  }
  out.subscriptionId = j["subscriptionId"].get<std::string>();
  if (!j.contains("timeStamp") || !j["timeStamp"].is_string()) schema_error("timeStamp", "missing");
  try {
    out.timeStamp = util::parse_rfc3339(j["timeStamp"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    schema_error("timeStamp", e.what());
  }
  if (!j.contains("exceptions") || !j["exceptions"].is_array()) {
    schema_error("exceptions", "expected array");
  }
  for (const json& ej : j["exceptions"]) {
    if (!ej.is_object()) schema_error("exceptions", "expected objects");
    ExceptionItem item;
    if (!ej.contains("excepId") || !ej["excepId"].is_string()) {
      schema_error("exceptions.excepId", "missing");
    }
    auto ex = exception_from_token(ej["excepId"].get<std::string>());
    if (!ex) {
      throw CodecError(CodecErrorKind::UnknownEnumToken, "exceptions.excepId",
                       "unknown token '" + ej["excepId"].get<std::string>() + "'");
    }
    item.excepId = *ex;
    if (ej.contains("ueIpv4Addrs")) {
      if (!ej["ueIpv4Addrs"].is_array()) schema_error("exceptions.ueIpv4Addrs", "expected array");
      for (const json& u : ej["ueIpv4Addrs"]) {
        if (!u.is_string() || !util::is_ipv4(u.get<std::string>())) {
          schema_error("exceptions.ueIpv4Addrs", "expected IPv4 strings");
        }
        item.ueIpv4Addrs.push_back(u.get<std::string>());
      }
    }
    if (ej.contains("pduSessionIds")) {
      if (!ej["pduSessionIds"].is_array()) schema_error("exceptions.pduSessionIds", "expected array");
      for (const json& p : ej["pduSessionIds"]) {
        if (!p.is_number_integer()) schema_error("exceptions.pduSessionIds", "expected integers");
        item.pduSessionIds.push_back(p.get<int64_t>());
      }
    }
    if (!ej.contains("confidence") || !ej["confidence"].is_number()) {
      schema_error("exceptions.confidence", "missing");
    }
    item.confidence = ej["confidence"].get<double>();
    if (item.confidence < 0.0 || item.confidence > 1.0) {
      schema_error("exceptions.confidence", "out of [0,1]");
    }
    out.exceptions.push_back(std::move(item));
  }
  return out;
}

std::string encode_abnormal_notification(const AbnormalBehaviourNotification& n) {
  json exceptions = json::array();
  for (const ExceptionItem& e : n.exceptions) {
    if (e.confidence < 0.0 || e.confidence > 1.0) {
      throw CodecError(CodecErrorKind::InvariantViolation, "exceptions.confidence", "out of [0,1]");
    }
    exceptions.push_back(json{{"excepId", to_token(e.excepId)},
                              {"ueIpv4Addrs", e.ueIpv4Addrs},
                              {"pduSessionIds", e.pduSessionIds},
                              {"confidence", e.confidence}});
  }
  return json{{"subscriptionId", n.subscriptionId},
              {"timeStamp", util::format_rfc3339(n.timeStamp)},
              {"exceptions", exceptions}}
      .dump();
}

}  // namespace cloop::nwdaf
