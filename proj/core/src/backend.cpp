#include "garboost/backend.hpp"

#include <algorithm>

#include "garboost/error.hpp"

namespace garboost {

EmbedResult Retriever::embed_one(const std::string& text) {
  auto batch = embed_batch({text});
  return EmbedResult{std::move(batch.rows.at(0)), batch.zero_flags.at(0)};
}

std::vector<std::string> Generator::rank_docs(const std::string& query,
                                              const std::vector<ScoredDoc>& docs) {
  auto ranking = rank_docs_impl(query, docs);
  std::vector<std::string> expected;
  expected.reserve(docs.size());
  for (const auto& d : docs) expected.push_back(d.id);
  auto sorted_ranking = ranking;
  std::sort(sorted_ranking.begin(), sorted_ranking.end());
  std::sort(expected.begin(), expected.end());
  if (sorted_ranking != expected) {
    throw RankParseError("ranking is not a permutation of the input ids", "");
  }
  return ranking;
}

std::string hypothetical_doc_prompt(const std::string& task,
                                    const std::string& query) {
  return
      "Given a retrieval task and a query, your mission is to generate a brief "
      "document for the query in the context of the retrieval task.\n"
      "\n"
      "Task: " + task + "\n"
      "\n"
      "Query: " + query + "\n"
      "\n"
      "Your output:";
}

std::string query_gen_prompt(const std::string& task,
                             const std::string& passage) {
  return
      "Here is a retrieval task (Task) and a document (Passage):\n"
      "\n"
      "Task: " + task + "\n"
      "\n"
      "Passage: " + passage + "\n"
      "\n"
      "Given the retrieval task and the document, your mission is:\n"
      "- Generate a query that the document can answer.\n"
      "\n"
      "Note:\n"
      "- The generated query should not contain the pronouns such as \"this\", "
      "\"that\", \"it\", \"there\", \"here\", etc.\n"
      "- The generated query should be clear and 5 to 10 words.\n"
      "- The generated query should be common and formal in terms of language "
      "style.\n"
      "\n"
      "Your output should be a string of the generated query. Remember do not "
      "explain your output.\n"
      "\n"
      "Your output:";
}

std::string judge_prompt(const std::string& task, const std::string& query,
                         const std::string& passage) {
  return
      "Given a retrieval task (Task), a query (Query), and a document "
      "(Passage), your mission is: Judge whether the document can answer the "
      "query.\n"
      "\n"
      "Task: " + task + "\n"
      "\n"
      "Query: " + query + "\n"
      "Passage: " + passage + "\n"
      "\n"
      "Your output must be one of the following:\n"
      "- 0: No, the document cannot answer the query.\n"
      "- 1: Yes, the document can answer the query.\n"
      "\n"
      "Do not explain your answer in the output. Your output must be a single "
      "number.\n"
      "\n"
      "Your output:";
}

}  // namespace garboost
