#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgefed/cli/cli.hpp"
#include "edgefed/contract/federation_contract.hpp"
#include "edgefed/ledger/ledger.hpp"
#include "edgefed/metrics/metrics.hpp"
#include "edgefed/sim/scenario.hpp"

namespace py = pybind11;
using namespace edgefed;

namespace {

py::object opt_seconds(const std::optional<SimTime>& t) {
  return t ? py::cast(t->seconds()) : py::none();
}

py::dict trace_dict(const metrics::FederationTrace& t) {
  py::dict d;
  d["run"] = t.run;
  d["consumer_index"] = t.consumer_index;
  d["ann_id"] = t.ann_id ? py::cast(*t.ann_id) : py::none();
  d["consumer"] = t.consumer.hex();
  d["winner"] = t.winner ? py::cast(t.winner->hex()) : py::none();
  d["announce_submitted"] = opt_seconds(t.announce_submitted);
  d["announce_finalized"] = opt_seconds(t.announce_finalized);
  d["second_bid_finalized"] = opt_seconds(t.second_bid_finalized);
  d["winner_finalized"] = opt_seconds(t.winner_finalized);
  d["deployment_started"] = opt_seconds(t.deployment_started);
  d["confirm_finalized"] = opt_seconds(t.confirm_finalized);
  d["established"] = opt_seconds(t.established);
  d["close_finalized"] = opt_seconds(t.close_finalized);
  d["complete"] = t.complete;
  return d;
}

std::optional<SimTime> seconds_field(const py::dict& d, const char* key) {
  if (!d.contains(key) || d[key].is_none()) return std::nullopt;
  return SimTime::from_seconds(d[key].cast<double>());
}

metrics::FederationTrace trace_from_dict(const py::dict& d) {
  metrics::FederationTrace t;
  t.announce_submitted = seconds_field(d, "announce_submitted");
  t.second_bid_finalized = seconds_field(d, "second_bid_finalized");
  t.winner_finalized = seconds_field(d, "winner_finalized");
  t.deployment_started = seconds_field(d, "deployment_started");
  t.confirm_finalized = seconds_field(d, "confirm_finalized");
  t.established = seconds_field(d, "established");
  t.complete = d.contains("complete") ? d["complete"].cast<bool>() : true;
  return t;
}

py::dict breakdown_dict(const metrics::PhaseBreakdown& b) {
  py::dict d;
  const auto seg = metrics::segments(b);
  for (std::size_t i = 0; i < metrics::kSegmentCount; ++i)
    d[metrics::kSegmentNames[i]] = static_cast<double>(seg[i]) / 1e6;
  return d;
}

py::dict stats_dict(const metrics::AggregateStats& s) {
  py::dict d;
  d["n_samples"] = s.n_samples;
  d["n_incomplete"] = s.n_incomplete;
  for (std::size_t i = 0; i < metrics::kSegmentCount; ++i) {
    const auto& seg = s.segments[i];
    py::dict e;
    e["mean"] = seg.mean;
    e["variance"] = seg.variance;
    e["min"] = seg.min;
    e["max"] = seg.max;
    d[metrics::kSegmentNames[i]] = e;
  }
  return d;
}

Address addr(const std::string& s) { return s.rfind("0x", 0) == 0 ? Address::from_hex(s) : Address::derive(s); }

/// Thin Python facade over the contract: addresses are hex strings or labels,
/// amounts are decimal strings.
class PyContract {
 public:
  PyContract(const std::map<std::string, std::string>& balances, const std::vector<std::string>& oracles,
             std::uint32_t min_bids) {
    contract::Genesis g;
    for (const auto& [a, v] : balances) g.balances[addr(a)] = Amount::parse(v);
    for (const auto& o : oracles) g.oracles.insert(addr(o));
    g.min_bids = min_bids;
    c_ = contract::FederationContract(g);
  }

  void register_operator(const std::string& sender, const std::string& name) {
    call([&] { c_.register_operator(addr(sender), name); });
  }
  contract::AnnId announce_service(const std::string& sender, const std::string& app_id, const std::string& deposit,
                                   const std::string& penalty, std::uint64_t block) {
    contract::call::AnnounceService a;
    a.requirements.app_id = app_id;
    a.deposit = Amount::parse(deposit);
    a.sla.penalty = Amount::parse(penalty);
    contract::AnnId id = 0;
    call([&] { id = c_.announce_service(addr(sender), a, block).ann_id; });
    return id;
  }
  std::uint32_t place_bid(const std::string& sender, contract::AnnId id, const std::string& price,
                          std::uint64_t block) {
    std::uint32_t n = 0;
    call([&] { n = c_.place_bid(addr(sender), id, Amount::parse(price), block).bid_count; });
    return n;
  }
  std::string choose_provider(const std::string& sender, contract::AnnId id) {
    std::string w;
    call([&] { w = c_.choose_provider(addr(sender), id).winner.hex(); });
    return w;
  }
  void confirm_deployment(const std::string& sender, contract::AnnId id, const std::string& ip, std::uint16_t port,
                          std::uint32_t vni) {
    call([&] { c_.confirm_deployment(addr(sender), id, {ip, port, vni}); });
  }
  void close_federation(const std::string& sender, contract::AnnId id) {
    call([&] { c_.close_federation(addr(sender), id); });
  }
  py::dict report_qos(const std::string& sender, contract::AnnId id, double availability, double latency_ms) {
    contract::event::Settled ev;
    call([&] {
      ev = c_.report_qos(addr(sender), id, static_cast<std::uint32_t>(std::llround(availability * 1e6)),
                         std::llround(latency_ms * 1e3));
    });
    py::dict d;
    d["sla_violated"] = ev.sla_violated;
    d["consumer_refund"] = ev.consumer_refund.to_string();
    d["provider_payment"] = ev.provider_payment.to_string();
    return d;
  }
  std::string phase(contract::AnnId id) const { return std::string(contract::to_string(c_.federation(id).phase)); }
  std::string balance(const std::string& a) const { return c_.balance(addr(a)).to_string(); }
  std::string total_funds() const { return c_.total_funds().to_string(); }
  std::string state_digest() const { return to_hex(c_.state_digest()); }

 private:
  template <class F>
  void call(F&& f) {
    try {
      f();
    } catch (const contract::ContractError& e) {
      throw py::value_error(std::string(contract::to_string(e.code())));
    }
  }
  contract::FederationContract c_;
};

}  // namespace

PYBIND11_MODULE(_edgefed, m) {
  m.doc() = "Deterministic simulator for ledger-driven edge federation";

  py::register_exception<sim::ConfigInvalid>(m, "ConfigInvalid", PyExc_ValueError);
  py::register_exception<metrics::MetricsError>(m, "MetricsError", PyExc_ValueError);
  py::register_exception<cli::MismatchedScenarios>(m, "MismatchedScenarios", PyExc_ValueError);

  m.def(
      "generate_topology",
      [](std::uint32_t n) {
        const auto s = sim::generate_topology(n);
        return std::make_pair(s.consumers, s.providers);
      },
      py::arg("n_systems"), "(consumers, providers) for n systems");

  m.def(
      "finality_delay",
      [](const std::string& algorithm, std::size_t validators, double message_delay_s, double validation_cost_s) {
        return ledger::finality_delay(ledger::parse_algorithm(algorithm), SimTime::from_seconds(message_delay_s),
                                      SimTime::from_seconds(validation_cost_s), validators)
            .seconds();
      },
      py::arg("algorithm"), py::arg("validators"), py::arg("message_delay_s") = 0.05,
      py::arg("validation_cost_s") = 0.05);

  m.def(
      "run_scenario",
      [](const std::string& config_json) {
        const auto cfg = sim::parse_scenario_json(config_json);
        sim::ScenarioResult res;
        {
          py::gil_scoped_release release;
          res = sim::run_scenario(cfg);
        }
        py::dict out;
        py::list traces;
        for (const auto& t : res.traces()) traces.append(trace_dict(t));
        out["traces"] = traces;
        out["warnings"] = res.warnings;
        bool conserved = true;
        std::size_t settled = 0;
        for (const auto& r : res.runs) {
          conserved = conserved && r.funds_conserved;
          settled += r.settled;
        }
        out["funds_conserved"] = conserved;
        out["settled"] = settled;
        return out;
      },
      py::arg("config_json"), "Runs a scenario given as a JSON document; returns traces as dicts");

  m.def(
      "decompose", [](const py::dict& trace) { return breakdown_dict(metrics::decompose(trace_from_dict(trace))); },
      py::arg("trace"));

  m.def(
      "aggregate",
      [](const std::vector<py::dict>& traces) {
        std::vector<metrics::FederationTrace> ts;
        for (const auto& d : traces) ts.push_back(trace_from_dict(d));
        return stats_dict(metrics::aggregate(std::span<const metrics::FederationTrace>(ts)));
      },
      py::arg("traces"));

  m.def(
      "compare",
      [](const std::string& blockchain_path, const std::string& soa_path) {
        const auto rows = cli::compare_rows(metrics::import_rows(blockchain_path), metrics::import_rows(soa_path));
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["n_systems"] = r.n_systems;
          d["blockchain_mean_s"] = r.blockchain_mean_s;
          d["soa_mean_s"] = r.soa_mean_s;
          d["overhead_s"] = r.overhead_s;
          out.append(d);
        }
        return out;
      },
      py::arg("blockchain_csv"), py::arg("soa_csv"));

  py::class_<PyContract>(m, "Contract")
      .def(py::init<const std::map<std::string, std::string>&, const std::vector<std::string>&, std::uint32_t>(),
           py::arg("balances"), py::arg("oracles") = std::vector<std::string>{}, py::arg("min_bids") = 2)
      .def("register_operator", &PyContract::register_operator, py::arg("sender"), py::arg("name"))
      .def("announce_service", &PyContract::announce_service, py::arg("sender"), py::arg("app_id"),
           py::arg("deposit"), py::arg("penalty") = "2.0", py::arg("block") = 1)
      .def("place_bid", &PyContract::place_bid, py::arg("sender"), py::arg("ann_id"), py::arg("price"),
           py::arg("block") = 2)
      .def("choose_provider", &PyContract::choose_provider, py::arg("sender"), py::arg("ann_id"))
      .def("confirm_deployment", &PyContract::confirm_deployment, py::arg("sender"), py::arg("ann_id"),
           py::arg("ip"), py::arg("udp_port") = 4789, py::arg("vni") = 0)
      .def("close_federation", &PyContract::close_federation, py::arg("sender"), py::arg("ann_id"))
      .def("report_qos", &PyContract::report_qos, py::arg("sender"), py::arg("ann_id"), py::arg("availability"),
           py::arg("latency_ms"))
      .def("phase", &PyContract::phase, py::arg("ann_id"))
      .def("balance", &PyContract::balance, py::arg("address"))
      .def("total_funds", &PyContract::total_funds)
      .def("state_digest", &PyContract::state_digest);

  m.def(
      "address", [](const std::string& label) { return Address::derive(label).hex(); }, py::arg("label"),
      "Deterministic address derived from a label");
}
