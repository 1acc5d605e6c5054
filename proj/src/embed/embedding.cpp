#include "poisonbench/embed/embedding.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace poisonbench {

void EmbeddingMatrix::validate() const {
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (!std::isfinite(values(i, j))) {
        throw ValidationError("embedding: non-finite value at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

EmbeddingMatrix bow_embed(std::span<const std::string> texts, const Vocabulary& vocab) {
  if (vocab.empty()) throw ValidationError("bow_embed: empty vocabulary");
  EmbeddingMatrix emb{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(texts.size()),
                                            static_cast<Eigen::Index>(vocab.size())),
                      "bow"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (const auto& tok : tokenize(texts[i])) {
      if (const auto col = vocab.index(tok); col >= 0) emb.values(static_cast<Eigen::Index>(i), col) += 1.0;
    }
  }
  return emb;
}

EmbeddingMatrix tfidf_embed(std::span<const std::string> texts, const Vocabulary& vocab) {
  EmbeddingMatrix emb = bow_embed(texts, vocab);
  const double n = static_cast<double>(texts.size());
  for (Eigen::Index j = 0; j < emb.values.cols(); ++j) {
    const double df = static_cast<double>((emb.values.col(j).array() > 0.0).count());
    emb.values.col(j) *= std::log((1.0 + n) / (1.0 + df)) + 1.0;
  }
  emb = l2_normalize_rows(std::move(emb));
  emb.provenance = "tfidf";
  return emb;
}

EmbeddingMatrix l2_normalize_rows(EmbeddingMatrix emb) {
  for (Eigen::Index i = 0; i < emb.values.rows(); ++i) {
    const double norm = emb.values.row(i).norm();
    if (norm > 0.0) emb.values.row(i) /= norm;
  }
  return emb;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");

  std::size_t rows = 0, dim = 0;
  std::string name;
  bool have_n = false, have_d = false;
  {
    std::istringstream hs(line);
    std::string field;
    while (hs >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw ParseError(path.string(), 1, "bad header field '" + field + "'");
      const auto key = field.substr(0, eq);
      const auto val = field.substr(eq + 1);
      try {
        if (key == "N") {
          rows = std::stoull(val);
          have_n = true;
        } else if (key == "d") {
          dim = std::stoull(val);
          have_d = true;
        } else if (key == "name") {
          name = val;
        }
      } catch (const std::exception&) {
        throw ParseError(path.string(), 1, "bad header value '" + field + "'");
      }
    }
  }
  if (!have_n || !have_d) throw ParseError(path.string(), 1, "header must be \"N=<rows> d=<dim> name=<tag>\"");
  if (expected_rows != 0 && rows != expected_rows) {
    throw ValidationError("embedding: header declares " + std::to_string(rows) + " rows, expected " +
                          std::to_string(expected_rows));
  }

  EmbeddingMatrix emb{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim)),
                      "external:" + (name.empty() ? path.stem().string() : name)};
  std::size_t r = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (r >= rows) {
      throw ValidationError("embedding: more than the declared " + std::to_string(rows) + " rows");
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c < dim; ++c) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw ParseError(path.string(), lineno, "expected " + std::to_string(dim) + " numbers, failed at column " +
                                                    std::to_string(c));
      }
      if (!std::isfinite(v)) {
        throw ValidationError("embedding: non-finite value at (" + std::to_string(r) + "," + std::to_string(c) + ")");
      }
      emb.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p != end) throw ParseError(path.string(), lineno, "more than " + std::to_string(dim) + " values");
    ++r;
  }
  if (r != rows) {
    throw ValidationError("embedding: expected " + std::to_string(rows) + " rows, found " + std::to_string(r));
  }
  return emb;
}

void save_embeddings(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  std::string name = emb.provenance;
  if (name.rfind("external:", 0) == 0) name = name.substr(9);
  out << "N=" << emb.rows() << " d=" << emb.dim() << " name=" << name << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < emb.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < emb.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", emb.values(i, j));
      if (j) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace poisonbench
