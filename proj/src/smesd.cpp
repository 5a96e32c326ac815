#include "comrisk/smesd.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>
#include <vector>

#include <boost/tokenizer.hpp>
#include <json.hpp>

#include "comrisk/ekg_io.hpp"
#include "comrisk/errors.hpp"

namespace comrisk {
namespace fs = std::filesystem;
namespace {

using Row = std::unordered_map<std::string, std::string>;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  boost::tokenizer<boost::escaped_list_separator<char>> tok(
      line, boost::escaped_list_separator<char>('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& t : tok) out.push_back(trim(t));
  return out;
}

struct Table {
  fs::path path;
  std::vector<Row> rows;
  std::vector<std::size_t> lines;
};

Table read_table(const fs::path& p, const std::vector<std::string>& required,
                 bool optional = false) {
  Table t;
  t.path = p;
  std::ifstream in(p);
  if (!in) {
    if (optional) return t;
    throw DataError("cannot open " + p.string());
  }
  std::string line;
  std::vector<std::string> header;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const boost::escaped_list_error& e) {
      throw DataError(p.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (header.empty()) {
      header = cells;
      if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
      for (const std::string& r : required) {
        if (std::find(header.begin(), header.end(), r) == header.end()) {
          throw DataError(p.filename().string() + ": missing column '" + r + "'");
        }
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw DataError(p.filename().string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    Row r;
    for (std::size_t i = 0; i < header.size(); ++i) r[header[i]] = cells[i];
    t.rows.push_back(std::move(r));
    t.lines.push_back(lineno);
  }
  return t;
}

std::string loc(const Table& t, std::size_t i) {
  return t.path.filename().string() + ":" + std::to_string(t.lines[i]);
}

double to_number(const Table& t, std::size_t i, const std::string& col) {
  const std::string& s = t.rows[i].at(col);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(loc(t, i) + ": column '" + col + "' is not a number: '" + s + "'");
  }
}

void write_lines(const fs::path& p, const std::vector<nlohmann::ordered_json>& records) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  for (const auto& r : records) out << r.dump() << '\n';
}

}  // namespace

std::string normalize_smesd_token(const std::string& s) {
  static const std::map<std::string, std::string> table = {
      {"借款合同纠纷", "loan_contract_dispute"},
      {"金融借款合同纠纷", "loan_contract_dispute"},
      {"民间借贷纠纷", "loan_contract_dispute"},
      {"买卖合同纠纷", "sales_contract_dispute"},
      {"基层人民法院", "grassroots"},
      {"基层法院", "grassroots"},
      {"中级人民法院", "intermediate"},
      {"中级法院", "intermediate"},
      {"高级人民法院", "higher"},
      {"高级法院", "higher"},
      {"最高人民法院", "supreme"},
      {"原告胜诉", "plaintiff_winner"},
      {"原告败诉", "plaintiff_loser"},
      {"被告胜诉", "defendant_winner"},
      {"被告败诉", "defendant_loser"},
  };
  auto it = table.find(s);
  return it == table.end() ? s : it->second;
}

EnterpriseKG convert_smesd(const fs::path& in_dir, const fs::path& out_dir,
                           const Date& snapshot) {
  const Table company =
      read_table(in_dir / "company.csv", {"id", "established_time", "registered_capital",
                                          "paid_in_capital", "label", "bankruptcy_date"});
  const Table person = read_table(in_dir / "person.csv", {"id"}, true);
  const Table edges = read_table(in_dir / "edges.csv", {"src", "dst", "relation", "weight"});
  const Table hyper =
      read_table(in_dir / "hyperedges.csv", {"type", "hyperedge", "member"}, true);
  const Table suits =
      read_table(in_dir / "lawsuits.csv", {"company", "cause", "court", "verdict", "date"});
  const Table split = read_table(in_dir / "split.csv", {"id", "split"});

  std::vector<nlohmann::ordered_json> nodes, edge_rows, hyper_rows, suit_rows;
  for (std::size_t i = 0; i < company.rows.size(); ++i) {
    const Row& r = company.rows[i];
    nlohmann::ordered_json n;
    n["id"] = r.at("id");
    n["kind"] = "enterprise";
    n["attrs"] = {{"established_time", std::llround(to_number(company, i, "established_time"))},
                  {"registered_capital", to_number(company, i, "registered_capital")},
                  {"paid_in_capital", to_number(company, i, "paid_in_capital")}};
    const std::string& label = r.at("label");
    if (label.empty()) n["label"] = nullptr;
    else if (label == "0" || label == "1") n["label"] = label == "1" ? 1 : 0;
    else throw DataError(loc(company, i) + ": label must be 0, 1 or empty");
    if (!r.at("bankruptcy_date").empty()) n["observation_time"] = r.at("bankruptcy_date");
    nodes.push_back(std::move(n));
  }
  for (const Row& r : person.rows) {
    nodes.push_back({{"id", r.at("id")}, {"kind", "person"}});
  }
  for (std::size_t i = 0; i < edges.rows.size(); ++i) {
    const Row& r = edges.rows[i];
    nlohmann::ordered_json e = {{"src", r.at("src")}, {"dst", r.at("dst")},
                                {"rel", r.at("relation")}};
    if (!r.at("weight").empty()) e["weight"] = to_number(edges, i, "weight");
    edge_rows.push_back(std::move(e));
  }
  // Membership rows grouped by (type, hyperedge) in first-seen order.
  std::map<std::pair<std::string, std::string>, std::size_t> group;
  for (const Row& r : hyper.rows) {
    const auto key = std::make_pair(r.at("type"), r.at("hyperedge"));
    auto [it, inserted] = group.emplace(key, hyper_rows.size());
    if (inserted) {
      hyper_rows.push_back({{"type", r.at("type")}, {"members", nlohmann::ordered_json::array()}});
    }
    hyper_rows[it->second]["members"].push_back(r.at("member"));
  }
  for (const Row& r : suits.rows) {
    suit_rows.push_back({{"enterprise", r.at("company")},
                         {"cause", normalize_smesd_token(r.at("cause"))},
                         {"court", normalize_smesd_token(r.at("court"))},
                         {"verdict", normalize_smesd_token(r.at("verdict"))},
                         {"date", r.at("date")}});
  }
  nlohmann::ordered_json splits = {{"train", nlohmann::ordered_json::array()},
                                   {"val", nlohmann::ordered_json::array()},
                                   {"test", nlohmann::ordered_json::array()},
                                   {"snapshot_date", snapshot.str()}};
  for (std::size_t i = 0; i < split.rows.size(); ++i) {
    std::string s = split.rows[i].at("split");
    if (s == "validation" || s == "valid") s = "val";
    if (s != "train" && s != "val" && s != "test") {
      throw DataError(loc(split, i) + ": unknown split '" + s + "'");
    }
    splits[s].push_back(split.rows[i].at("id"));
  }

  fs::create_directories(out_dir);
  const EkgPaths paths = EkgPaths::in_directory(out_dir);
  write_lines(paths.nodes, nodes);
  write_lines(paths.edges, edge_rows);
  write_lines(paths.hyperedges, hyper_rows);
  write_lines(paths.lawsuits, suit_rows);
  {
    std::ofstream out(paths.splits, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + paths.splits.string());
    out << splits.dump() << '\n';
  }
  return load_ekg(paths);
}

}  // namespace comrisk
