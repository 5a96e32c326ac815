#include "comrisk/ekg_io.hpp"

#include <fstream>
#include <functional>
#include <unordered_set>
#include <json.hpp>

#include "comrisk/errors.hpp"

namespace comrisk {
namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

EkgPaths EkgPaths::in_directory(const fs::path& dir) {
  return {dir / "nodes.jsonl", dir / "edges.jsonl", dir / "hyperedges.jsonl",
          dir / "lawsuits.jsonl", dir / "splits.json"};
}

namespace {

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::string where(const fs::path& p, std::size_t line) {
  return p.filename().string() + ":" + std::to_string(line);
}

// Calls `fn(record, location)` for every non-blank line, converting JSON and
// data errors into DataError tagged with file:line.
void for_each_record(const fs::path& p,
                     const std::function<void(const json&, const std::string&)>& fn) {
  std::ifstream in = open_input(p);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string loc = where(p, lineno);
    try {
      fn(json::parse(line), loc);
    } catch (const json::exception& e) {
      throw DataError(loc + ": " + e.what());
    } catch (const DataError& e) {
      const std::string msg = e.what();
      if (msg.rfind(loc, 0) == 0) throw;
      throw DataError(loc + ": " + msg);
    }
  }
}

std::string get_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw DataError(std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

}  // namespace

EnterpriseKG load_ekg(const EkgPaths& paths) {
  EnterpriseKG kg;

  // Splits first: the snapshot date bounds lawsuit dates.
  json splits_doc;
  {
    std::ifstream in = open_input(paths.splits);
    try {
      splits_doc = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(where(paths.splits, 1) + ": " + e.what());
    }
    try {
      kg.snapshot_date = Date::parse(get_string(splits_doc, "snapshot_date"));
    } catch (const DataError& e) {
      throw DataError(paths.splits.filename().string() + ": " + e.what());
    }
  }

  std::unordered_map<std::string, std::size_t> enterprise_index;
  std::vector<std::string> person_ids;
  std::unordered_set<std::string> seen_ids;
  for_each_record(paths.nodes, [&](const json& r, const std::string&) {
    const std::string id = get_string(r, "id");
    const std::string kind = get_string(r, "kind");
    if (!seen_ids.insert(id).second) throw DataError("duplicate id " + id);
    if (kind == "person") {
      person_ids.push_back(id);
      return;
    }
    if (kind != "enterprise") throw DataError("unknown node kind '" + kind + "'");
    Enterprise e;
    e.id = id;
    if (r.contains("attrs") && !r["attrs"].is_null()) {
      const json& a = r["attrs"];
      e.attrs.established_time = a.at("established_time").get<long>();
      e.attrs.registered_capital = a.at("registered_capital").get<double>();
      e.attrs.paid_in_capital = a.at("paid_in_capital").get<double>();
      if (e.attrs.established_time < 0 || e.attrs.registered_capital < 0 ||
          e.attrs.paid_in_capital < 0) {
        throw DataError("negative attribute for " + id);
      }
    }
    if (r.contains("label") && !r["label"].is_null()) {
      const int label = r["label"].get<int>();
      if (label != 0 && label != 1) throw DataError("label must be 0, 1 or null");
      e.label = label;
    }
    if (r.contains("observation_time") && !r["observation_time"].is_null()) {
      e.observation_time = Date::parse(r["observation_time"].get<std::string>());
    }
    enterprise_index.emplace(id, kg.enterprises.size());
    kg.enterprises.push_back(std::move(e));
  });

  std::unordered_map<std::string, std::size_t> node_index = enterprise_index;
  const std::size_t n_ent = kg.enterprises.size();
  for (std::size_t p = 0; p < person_ids.size(); ++p) {
    node_index.emplace(person_ids[p], n_ent + p);
    kg.persons.push_back({person_ids[p]});
  }
  auto resolve = [&](const std::string& id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw DataError("unknown node id '" + id + "'");
    return it->second;
  };
  auto resolve_enterprise = [&](const std::string& id) {
    auto it = enterprise_index.find(id);
    if (it == enterprise_index.end()) {
      throw DataError("unknown enterprise id '" + id + "'");
    }
    return it->second;
  };

  for_each_record(paths.edges, [&](const json& r, const std::string&) {
    HeteroEdge e;
    e.src = resolve(get_string(r, "src"));
    e.dst = resolve(get_string(r, "dst"));
    const std::string rel = get_string(r, "rel");
    auto parsed = parse_relation(rel);
    if (!parsed) throw DataError("unknown relation '" + rel + "'");
    e.rel = *parsed;
    if (r.contains("weight") && !r["weight"].is_null()) {
      e.weight = r["weight"].get<double>();
    }
    if (e.rel == Relation::HolderInvestor && !e.weight) {
      throw DataError("holder_investor edge without weight");
    }
    if (e.rel != Relation::HolderInvestor && e.weight) {
      throw DataError(rel + " edge must not carry a weight");
    }
    kg.edges.push_back(e);
  });

  for_each_record(paths.hyperedges, [&](const json& r, const std::string&) {
    Hyperedge h;
    const std::string type = get_string(r, "type");
    auto parsed = parse_hyperedge_type(type);
    if (!parsed) throw DataError("unknown hyperedge type '" + type + "'");
    h.type = *parsed;
    for (const json& m : r.at("members")) {
      h.members.push_back(resolve_enterprise(m.get<std::string>()));
    }
    if (h.members.empty()) throw DataError("hyperedge without members");
    kg.hyperedges.push_back(std::move(h));
  });

  for_each_record(paths.lawsuits, [&](const json& r, const std::string&) {
    const std::size_t owner = resolve_enterprise(get_string(r, "enterprise"));
    Lawsuit l;
    l.cause = parse_cause(get_string(r, "cause"));
    const std::string court = get_string(r, "court");
    const std::string verdict = get_string(r, "verdict");
    auto c = parse_court(court);
    if (!c) throw DataError("unknown court level '" + court + "'");
    auto v = parse_verdict(verdict);
    if (!v) throw DataError("unknown verdict '" + verdict + "'");
    l.court = *c;
    l.verdict = *v;
    l.date = Date::parse(get_string(r, "date"));
    if (l.date < Date(2000, 1, 1) || l.date > kg.snapshot_date) {
      throw DataError("lawsuit date " + l.date.str() +
                      " outside [2000-01-01, snapshot " + kg.snapshot_date.str() +
                      "]");
    }
    kg.enterprises[owner].lawsuits.push_back(std::move(l));
  });

  try {
    auto read_split = [&](const char* key, std::vector<std::size_t>& out) {
      if (!splits_doc.contains(key)) return;
      for (const json& id : splits_doc[key]) {
        out.push_back(resolve_enterprise(id.get<std::string>()));
      }
    };
    read_split("train", kg.splits.train);
    read_split("val", kg.splits.val);
    read_split("test", kg.splits.test);
  } catch (const std::exception& e) {
    throw DataError(paths.splits.filename().string() + ": " + e.what());
  }

  kg.validate();
  return kg;
}

EnterpriseKG load_ekg(const fs::path& dir) {
  return load_ekg(EkgPaths::in_directory(dir));
}

void write_ekg(const EnterpriseKG& kg, const fs::path& dir) {
  fs::create_directories(dir);
  const EkgPaths paths = EkgPaths::in_directory(dir);
  {
    std::ofstream out = open_output(paths.nodes);
    for (const Enterprise& e : kg.enterprises) {
      ordered_json r;
      r["id"] = e.id;
      r["kind"] = "enterprise";
      r["attrs"] = {{"established_time", e.attrs.established_time},
                    {"registered_capital", e.attrs.registered_capital},
                    {"paid_in_capital", e.attrs.paid_in_capital}};
      r["label"] = e.label ? ordered_json(*e.label) : ordered_json(nullptr);
      if (e.observation_time) r["observation_time"] = e.observation_time->str();
      out << r.dump() << '\n';
    }
    for (const Person& p : kg.persons) {
      ordered_json r;
      r["id"] = p.id;
      r["kind"] = "person";
      r["label"] = nullptr;
      out << r.dump() << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.edges);
    for (const HeteroEdge& e : kg.edges) {
      ordered_json r;
      r["src"] = kg.node_id(e.src);
      r["dst"] = kg.node_id(e.dst);
      r["rel"] = std::string(to_string(e.rel));
      if (e.weight) r["weight"] = *e.weight;
      out << r.dump() << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.hyperedges);
    for (const Hyperedge& h : kg.hyperedges) {
      ordered_json r;
      r["type"] = std::string(to_string(h.type));
      ordered_json members = ordered_json::array();
      for (std::size_t m : h.members) members.push_back(kg.enterprises[m].id);
      r["members"] = std::move(members);
      out << r.dump() << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.lawsuits);
    for (const Enterprise& e : kg.enterprises) {
      for (const Lawsuit& l : e.lawsuits) {
        ordered_json r;
        r["enterprise"] = e.id;
        r["cause"] = to_string(l.cause);
        r["court"] = std::string(to_string(l.court));
        r["verdict"] = std::string(to_string(l.verdict));
        r["date"] = l.date.str();
        out << r.dump() << '\n';
      }
    }
  }
  {
    std::ofstream out = open_output(paths.splits);
    auto ids = [&](const std::vector<std::size_t>& idx) {
      ordered_json a = ordered_json::array();
      for (std::size_t i : idx) a.push_back(kg.enterprises[i].id);
      return a;
    };
    ordered_json r;
    r["train"] = ids(kg.splits.train);
    r["val"] = ids(kg.splits.val);
    r["test"] = ids(kg.splits.test);
    r["snapshot_date"] = kg.snapshot_date.str();
    out << r.dump() << '\n';
  }
}

EmbeddingMap load_embeddings(const fs::path& file) {
  EmbeddingMap map;
  std::size_t width = 0;
  for_each_record(file, [&](const json& r, const std::string&) {
    const std::string id = get_string(r, "id");
    std::vector<double> v = r.at("vector").get<std::vector<double>>();
    if (map.empty()) width = v.size();
    if (v.size() != width) throw DataError("embedding width differs for " + id);
    if (!map.emplace(id, std::move(v)).second) {
      throw DataError("duplicate embedding id " + id);
    }
  });
  return map;
}

void write_embeddings(const std::vector<std::string>& ids,
                      const std::vector<std::vector<double>>& vectors,
                      const fs::path& file) {
  if (ids.size() != vectors.size()) throw DataError("embedding id/vector count");
  std::ofstream out = open_output(file);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ordered_json r;
    r["id"] = ids[i];
    r["vector"] = vectors[i];
    out << r.dump() << '\n';
  }
}

}  // namespace comrisk
