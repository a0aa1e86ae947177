#include "couplecheck/report.hpp"

namespace couplecheck {

using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const Report& r) {
  ordered_json j;
  j["property"] = r.property;
  j["subject"] = r.subject;
  j["event"] = r.event;
  j["route"] = route_name(r.route);
  j["status"] = status_name(r.status);
  j["slack"] = to_string(r.slack);
  j["max_deviation"] = to_string(r.max_deviation);
  j["checked"] = r.checked;
  j["total"] = r.total;
  j["exhaustive"] = r.exhaustive;
  j["message"] = r.message;
  j["notes"] = r.notes;
  auto& inst = j["instances"] = ordered_json::array();
  for (const auto& i : r.instances) inst.push_back({{"instance", i.instance}, {"ok", i.ok}, {"detail", i.detail}});
  return j;
}

Report report_from_json(const nlohmann::ordered_json& j) {
  Report r;
  r.property = j.at("property").get<std::string>();
  r.subject = j.at("subject").get<std::string>();
  r.event = j.at("event").get<std::string>();
  r.route = parse_route(j.at("route").get<std::string>());
  auto st = j.at("status").get<std::string>();
  r.status = st == "CERTIFIED" ? Status::Certified : st == "FAILED" ? Status::Failed : Status::NotApplicable;
  r.slack = parse_rational(j.at("slack").get<std::string>());
  r.max_deviation = parse_rational(j.at("max_deviation").get<std::string>());
  r.checked = j.at("checked").get<std::size_t>();
  r.total = j.at("total").get<std::size_t>();
  r.exhaustive = j.at("exhaustive").get<bool>();
  r.message = j.at("message").get<std::string>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& i : j.at("instances"))
    r.instances.push_back({i.at("instance").get<std::string>(), i.at("ok").get<bool>(), i.at("detail").get<std::string>()});
  return r;
}

bool operator==(const InstanceReport& a, const InstanceReport& b) {
  return a.instance == b.instance && a.ok == b.ok && a.detail == b.detail;
}

bool operator==(const Report& a, const Report& b) {
  return a.property == b.property && a.subject == b.subject && a.event == b.event && a.route == b.route &&
         a.status == b.status && a.slack == b.slack && a.max_deviation == b.max_deviation &&
         a.checked == b.checked && a.total == b.total && a.exhaustive == b.exhaustive && a.message == b.message &&
         a.notes == b.notes && a.instances == b.instances;
}

std::string format_report(const std::vector<Report>& results, bool json) {
  if (json) {
    ordered_json j;
    j["tool"] = "couplecheck";
    j["results"] = ordered_json::array();
    for (const auto& r : results) j["results"].push_back(to_json(r));
    return j.dump(2) + "\n";
  }
  std::string s = "couplecheck: " + std::to_string(results.size()) + " result(s)\n";
  for (const auto& r : results) {
    s += r.line() + "\n";
    s += "  route " + route_name(r.route) + ", " + std::to_string(r.checked) + " instance(s)";
    if (r.route == Route::Oracle) s += ", max deviation " + to_string(r.max_deviation);
    s += "\n";
    if (!r.message.empty()) s += "  " + r.message + "\n";
    for (const auto& n : r.notes) s += "  note: " + n + "\n";
    for (const auto& i : r.instances)
      if (!i.ok) s += "  failed " + i.instance + ": " + i.detail + "\n";
  }
  return s;
}

}  // namespace couplecheck
