#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "evanno/corpus.hpp"
#include "evanno/curation.hpp"
#include "evanno/event_set.hpp"
#include "evanno/oracle.hpp"

namespace evanno::fixtures {

// 40 documents describing 12 planted events. doc-38, doc-39 and doc-40 each
// report two events. Event k is tagged [[Ek]] in the text, and every event
// segment carries a <<vars ...>> block for the stub extractor.
struct StubCorpus {
  std::vector<Document> docs;
  std::vector<EventSet> gold_segments;   // (doc, segment) members
  std::vector<EventSet> gold_documents;  // doc-level members
  std::size_t n_events = 0;
};

StubCorpus stub_corpus();

// Planted variable values for event k (1-based), as the stub extractor
// returns them.
std::string planted_vars(int k);

// n_clusters blocks of cluster_size documents; within-block similarity in
// [0.85, 1], between blocks in [0, 0.6] with one pair at exactly 0.6.
struct PlantedMatrix {
  SimilarityMatrix matrix;
  std::vector<EventSet> gold;
};

PlantedMatrix planted_matrix(std::size_t n_clusters, std::size_t cluster_size, std::uint64_t seed);

// Minimum total cost over all injective row-to-column matchings of the
// zero-padded square matrix, by enumerating every permutation.
double brute_force_min_cost(const Eigen::MatrixXd& costs);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(std::string_view tag);

// Project directory built through the CLI (init + ingest) over the stub
// corpus, with the provider pointed at the offline stub backend. Gold sets
// are document-level; the gold set of E5 leaves out doc-40, so E5 is not an
// exact match for any LM set.
std::filesystem::path stub_project(std::string_view tag);

// run_cli over a project directory; throws with the captured stderr when
// the command fails.
std::string run_in(const std::filesystem::path& project, std::vector<std::string> args,
                   std::shared_ptr<Transport> transport = nullptr);

// Labeled toy corpus for the relevance classifier: relevant documents use
// attack vocabulary, irrelevant ones sports/finance vocabulary.
std::vector<std::pair<Document, bool>> toy_relevance_corpus(std::size_t n, std::uint64_t seed);

}  // namespace evanno::fixtures
