#include "garboost/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

using nlohmann::json;

namespace {

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read file: " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

json parse_record(const std::string& path, size_t line_no, const std::string& line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(path, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!rec.is_object()) throw MalformedRecord(path, line_no, "record is not an object");
  return rec;
}

std::string require_string(const json& rec, const char* field,
                           const std::string& path, size_t line_no) {
  if (!rec.contains(field) || !rec.at(field).is_string()) {
    throw MalformedRecord(path, line_no,
                          std::string("missing or non-string field \"") + field + "\"");
  }
  return rec.at(field).get<std::string>();
}

}  // namespace

const Document* Corpus::find(const std::string& id) const {
  for (const auto& d : docs) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

Corpus load_corpus(const std::string& path) {
  auto in = open_for_read(path);
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = parse_record(path, line_no, line);
    Document doc;
    doc.id = require_string(rec, "_id", path, line_no);
    if (doc.id.empty()) throw MalformedRecord(path, line_no, "empty _id");
    doc.title = rec.contains("title") && rec.at("title").is_string()
                    ? rec.at("title").get<std::string>()
                    : "";
    doc.text = require_string(rec, "text", path, line_no);
    if (doc.text.empty()) throw MalformedRecord(path, line_no, "empty text");
    if (!seen.insert(doc.id).second) throw DuplicateId(doc.id);
    corpus.docs.push_back(std::move(doc));
  }
  if (corpus.docs.empty()) throw EmptyCorpus("empty corpus: " + path);
  return corpus;
}

std::vector<Query> load_queries(const std::string& path) {
  auto in = open_for_read(path);
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = parse_record(path, line_no, line);
    Query q;
    q.id = require_string(rec, "_id", path, line_no);
    if (q.id.empty()) throw MalformedRecord(path, line_no, "empty _id");
    q.text = require_string(rec, "text", path, line_no);
    if (q.text.empty()) throw MalformedRecord(path, line_no, "empty text");
    if (rec.contains("source")) {
      const std::string s = require_string(rec, "source", path, line_no);
      if (s == "synthetic") {
        q.source = QuerySource::kSynthetic;
      } else if (s == "original") {
        q.source = QuerySource::kOriginal;
      } else {
        throw MalformedRecord(path, line_no, "unknown source \"" + s + "\"");
      }
    }
    if (rec.contains("provenance_doc")) {
      q.provenance_doc = require_string(rec, "provenance_doc", path, line_no);
    }
    if (!seen.insert(q.id).second) throw DuplicateId(q.id);
    queries.push_back(std::move(q));
  }
  return queries;
}

QrelSet load_qrels(const std::string& path) {
  auto in = open_for_read(path);
  QrelSet qrels;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "query-id\tcorpus-id\tscore") continue;
    std::istringstream ss(line);
    std::string qid, did, score;
    if (!std::getline(ss, qid, '\t') || !std::getline(ss, did, '\t') ||
        !std::getline(ss, score, '\t')) {
      throw MalformedRecord(path, line_no, "expected query-id<TAB>corpus-id<TAB>score");
    }
    if (qid.empty() || did.empty()) {
      throw MalformedRecord(path, line_no, "empty id");
    }
    int grade = 0;
    size_t pos = 0;
    try {
      grade = std::stoi(score, &pos);
    } catch (const std::exception&) {
      throw InvalidGrade(path + ":" + std::to_string(line_no) +
                         ": non-integer score \"" + score + "\"");
    }
    if (pos != score.size()) {
      throw InvalidGrade(path + ":" + std::to_string(line_no) +
                         ": non-integer score \"" + score + "\"");
    }
    if (grade < 0) {
      throw InvalidGrade(path + ":" + std::to_string(line_no) +
                         ": negative grade " + score);
    }
    auto& per_query = qrels.judgments[qid];
    if (!per_query.emplace(did, grade).second) {
      throw DuplicateJudgment("duplicate judgment for (" + qid + ", " + did + ")");
    }
  }
  return qrels;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  auto out = open_for_write(path);
  for (const auto& d : corpus.docs) {
    json rec{{"_id", d.id}, {"title", d.title}, {"text", d.text}};
    out << rec.dump() << '\n';
  }
}

void save_queries(const std::vector<Query>& queries, const std::string& path) {
  auto out = open_for_write(path);
  for (const auto& q : queries) {
    json rec{{"_id", q.id}, {"text", q.text}};
    if (q.source == QuerySource::kSynthetic) {
      rec["source"] = "synthetic";
      if (q.provenance_doc) rec["provenance_doc"] = *q.provenance_doc;
    }
    out << rec.dump() << '\n';
  }
}

void save_qrels(const QrelSet& qrels, const std::string& path) {
  auto out = open_for_write(path);
  out << "query-id\tcorpus-id\tscore\n";
  for (const auto& [qid, per_query] : qrels.judgments) {
    for (const auto& [did, grade] : per_query) {
      out << qid << '\t' << did << '\t' << grade << '\n';
    }
  }
}

void validate_bundle(const DatasetBundle& bundle) {
  std::unordered_set<std::string> doc_ids;
  for (const auto& d : bundle.corpus.docs) doc_ids.insert(d.id);
  std::unordered_set<std::string> query_ids;
  for (const auto& q : bundle.queries) {
    query_ids.insert(q.id);
    if (q.source == QuerySource::kSynthetic) {
      if (!q.provenance_doc) {
        throw BundleValidationError("synthetic query " + q.id +
                                    " has no provenance_doc");
      }
      if (!doc_ids.count(*q.provenance_doc)) {
        throw BundleValidationError("query " + q.id + " references unknown doc " +
                                    *q.provenance_doc);
      }
    }
  }
  for (const auto& [qid, per_query] : bundle.qrels.judgments) {
    if (!query_ids.count(qid)) {
      throw BundleValidationError("qrels reference unknown query " + qid);
    }
    for (const auto& [did, grade] : per_query) {
      (void)grade;
      if (!doc_ids.count(did)) {
        throw BundleValidationError("qrels reference unknown doc " + did);
      }
    }
  }
}

std::vector<Document> sample_documents(const Corpus& corpus, size_t n,
                                       uint64_t seed) {
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(corpus.size(), n);
  std::vector<Document> out;
  out.reserve(picks.size());
  for (size_t i : picks) out.push_back(corpus.docs[i]);
  return out;
}

}  // namespace garboost
