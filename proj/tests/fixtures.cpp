#include "fixtures.hpp"

#include "evanno/cli.hpp"
#include "evanno/io.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

namespace evanno::fixtures {

namespace {

struct EventFacts {
  const char* country;
  const char* location;
  const char* target;
  const char* perpetrator;
  const char* attack;
  const char* weapon;
  const char* specific;
};

constexpr std::array<EventFacts, 12> kEvents{{
    {"Philippines", "Barangay Palampas", "civilians", "New People's Army", "Armed Assault", "Firearms", "rifles"},
    {"Nigeria", "Maiduguri", "market traders", "Boko Haram", "Bombing/Explosion", "Explosives", "suicide vest"},
    {"Colombia", "Tumaco", "police patrol", "ELN", "Armed Assault", "Firearms", "pistols"},
    {"India", "Sukma", "road crew", "Maoist rebels", "Bombing/Explosion", "Explosives", "landmine"},
    {"Mali", "Mopti", "villagers", "JNIM", "Hostage Taking (Kidnapping)", "Firearms", "assault rifles"},
    {"Canada", "Morice River drill pad site", "pipeline workers", "unknown assailants",
     "Facility/Infrastructure Attack", "Melee", "axes"},
    {"Pakistan", "Quetta", "school bus", "Balochistan Liberation Army", "Bombing/Explosion", "Explosives",
     "roadside bomb"},
    {"Mozambique", "Palma", "hotel guests", "Ansar al-Sunna", "Armed Assault", "Firearms", "machine guns"},
    {"Somalia", "Mogadishu", "hotel", "al-Shabaab", "Bombing/Explosion", "Vehicle", "car bomb"},
    {"Cameroon", "Bamenda", "teachers", "separatist fighters", "Hostage Taking (Kidnapping)", "Firearms",
     "hunting rifles"},
    {"Iraq", "Kirkuk", "power station", "Islamic State", "Facility/Infrastructure Attack", "Incendiary",
     "petrol bombs"},
    {"Kenya", "Lamu", "bus passengers", "al-Shabaab", "Armed Assault", "Firearms", "rifles"},
}};

constexpr std::array<const char*, 6> kVerbs{"reported", "said", "confirmed", "told reporters", "stated", "announced"};
constexpr std::array<const char*, 6> kSources{"Reuters", "AFP", "local radio", "the regional governor",
                                              "a police spokesman", "witnesses"};

std::string event_segment(int k, int variant) {
  const auto& e = kEvents[static_cast<std::size_t>(k - 1)];
  const int kills = k % 4 + 1;
  const int wounds = k % 5 + 2;
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "[[E%d]] %s attacked %s in %s, %s, using %s. %s %s that %d people were killed and %d wounded "
                "(dispatch %d). %s",
                k, e.perpetrator, e.target, e.location, e.country, e.specific, kSources[variant % 6],
                kVerbs[(variant + k) % 6], kills, wounds, variant, planted_vars(k).c_str());
  return buf;
}

}  // namespace

std::string planted_vars(int k) {
  const auto& e = kEvents[static_cast<std::size_t>(k - 1)];
  const nlohmann::json vars{{"Country", e.country},       {"Location", e.location},
                            {"Target", e.target},         {"Perpetrator", e.perpetrator},
                            {"GenericAttack", e.attack},  {"GenericWeapon", {e.weapon}},
                            {"SpecificWeapon", e.specific}, {"Kills", k % 4 + 1},
                            {"Wounds", k % 5 + 2}};
  return "<<vars " + vars.dump() + ">>";
}

StubCorpus stub_corpus() {
  StubCorpus out;
  out.n_events = kEvents.size();
  std::vector<std::vector<MemberRef>> seg_clusters(kEvents.size());
  std::vector<std::vector<MemberRef>> doc_clusters(kEvents.size());
  auto add_doc = [&](int index, const std::vector<int>& events) {
    char id[32];
    std::snprintf(id, sizeof id, "doc-%02d", index);
    Document d;
    d.id = id;
    d.source = kSources[static_cast<std::size_t>(index) % kSources.size()];
    d.published_at = "2022-02-" + std::to_string(10 + index % 18);
    d.title = "Attack report " + std::to_string(index);
    for (std::size_t s = 0; s < events.size(); ++s) {
      if (s) d.body += "\n";
      d.body += event_segment(events[s], index);
      d.tags.push_back("E" + std::to_string(events[s]));
      seg_clusters[static_cast<std::size_t>(events[s] - 1)].push_back({d.id, s});
      doc_clusters[static_cast<std::size_t>(events[s] - 1)].push_back({d.id, std::nullopt});
    }
    out.docs.push_back(std::move(d));
  };
  for (int j = 0; j < 37; ++j) add_doc(j + 1, {j % 12 + 1});
  add_doc(38, {1, 2});
  add_doc(39, {3, 4});
  add_doc(40, {5, 6});
  out.gold_segments = canonicalize(seg_clusters, Method::gold);
  out.gold_documents = canonicalize(doc_clusters, Method::gold);
  return out;
}

PlantedMatrix planted_matrix(std::size_t n_clusters, std::size_t cluster_size, std::uint64_t seed) {
  const auto n = n_clusters * cluster_size;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> intra(0.85, 1.0);
  std::uniform_real_distribution<double> inter(0.0, 0.6);
  // Interleave cluster membership so blocks are not contiguous.
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i % n_clusters;
  PlantedMatrix out;
  out.matrix.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<MemberRef>> clusters(n_clusters);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "m%03zu", i);
    out.matrix.ids.emplace_back(id);
    clusters[label[i]].push_back({id, std::nullopt});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = label[i] == label[j] ? intra(rng) : inter(rng);
      out.matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
      out.matrix.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
    }
  }
  // One between-cluster pair sits exactly on the 0.6 bound.
  if (n_clusters > 1) out.matrix.values(0, 1) = out.matrix.values(1, 0) = 0.6;
  out.gold = canonicalize(clusters, Method::gold);
  return out;
}

double brute_force_min_cost(const Eigen::MatrixXd& costs) {
  const auto n = std::max(costs.rows(), costs.cols());
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(n, n);
  square.topLeftCorner(costs.rows(), costs.cols()) = costs;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (Eigen::Index r = 0; r < n; ++r) total += square(r, perm[static_cast<std::size_t>(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::filesystem::path temp_dir(std::string_view tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("evanno-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string run_in(const std::filesystem::path& project, std::vector<std::string> args,
                   std::shared_ptr<Transport> transport) {
  args.insert(args.begin(), {"--project", project.string()});
  std::ostringstream out, err;
  CliHooks hooks;
  hooks.transport = std::move(transport);
  if (run_cli(args, out, err, hooks) != 0) throw Error("evanno " + args[2] + " failed: " + err.str());
  return out.str();
}

std::filesystem::path stub_project(std::string_view tag) {
  const auto dir = temp_dir(tag);
  const auto root = dir / "project";
  run_in(root, {"init"});
  auto config = read_json_file(root / "config.json");
  config["provider"]["base_url"] = "stub:";
  write_json_file(root / "config.json", config);

  const auto stub = stub_corpus();
  write_jsonl(dir / "corpus.jsonl", stub.docs);
  auto gold = stub.gold_documents;
  for (auto& set : gold) {
    if (set.members.front().doc == "doc-05") set.members.pop_back();
  }
  save_event_sets(dir / "gold.json", gold);
  run_in(root, {"ingest", (dir / "corpus.jsonl").string(), "--gold", (dir / "gold.json").string()});
  return root;
}

std::vector<std::pair<Document, bool>> toy_relevance_corpus(std::size_t n, std::uint64_t seed) {
  static constexpr std::array<const char*, 12> kAttack{"gunmen", "attack", "bomb",    "hostage", "rebels", "ambush",
                                                       "killed", "militants", "explosion", "kidnapped", "insurgents",
                                                       "arson"};
  static constexpr std::array<const char*, 12> kOther{"match",   "goal",    "league", "shares", "market", "profit",
                                                      "concert", "festival", "recipe", "weather", "election",
                                                      "tourism"};
  static constexpr std::array<const char*, 8> kFiller{"the", "on", "in", "city", "today", "officials", "said", "week"};
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Document, bool>> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool relevant = i % 2 == 0;
    const auto& vocab = relevant ? kAttack : kOther;
    std::string body;
    for (int w = 0; w < 12; ++w) {
      const auto r = rng();
      body += (w ? " " : "");
      body += (r % 3 == 0) ? kFiller[(r / 3) % kFiller.size()] : vocab[(r / 3) % vocab.size()];
    }
    Document d;
    d.id = "toy-" + std::to_string(i);
    d.title = "item " + std::to_string(i);
    d.body = body;
    out.emplace_back(std::move(d), relevant);
  }
  return out;
}

}  // namespace evanno::fixtures
