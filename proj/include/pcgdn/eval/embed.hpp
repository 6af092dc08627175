// Copyright 2026 The pcgdn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcgdn/audio.hpp"
#include "pcgdn/common.hpp"
#include "pcgdn/eval/tsne.hpp"
#include "pcgdn/model.hpp"

namespace pcgdn::eval {

// Projection-head embeddings, one per segment. Inputs get the same peak
// normalization and padding as denoising.
inline std::vector<Embedding> embed_segments(const ModelState& state, const std::vector<AudioSegment>& segs) {
  const auto len = static_cast<std::size_t>(state.config.input_len);
  nn::Mat batch(static_cast<nn::Index>(segs.size()), static_cast<nn::Index>(len));
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].size() > len)
      throw DataError(str_cat("embed: segment '", segs[i].source_id, "' longer than model input_len ", len));
    auto v = fit_to_length(segs[i].samples, len);
    const double pk = peak(v);
    if (pk > 0.0)
      for (auto& s : v) s /= pk;
    batch.row(static_cast<nn::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<nn::Index>(len));
  }
  return project(state, forward(state, batch).bottlenecks);
}

struct EmbeddingExport {
  std::vector<std::string> ids;
  std::vector<double> offsets_s;
  std::vector<int> labels;  // -1 when unlabeled
  std::vector<Embedding> embeddings;
  nn::Mat coords;  // n x 2 t-SNE coordinates
  TsneParams tsne;
};

inline EmbeddingExport export_embeddings(const ModelState& state, const std::vector<AudioSegment>& segs,
                                         const TsneParams& params = {}) {
  EmbeddingExport e;
  e.tsne = params;
  e.embeddings = embed_segments(state, segs);
  std::vector<nn::Vec> pts;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    e.ids.push_back(segs[i].source_id);
    e.offsets_s.push_back(segs[i].offset_s);
    e.labels.push_back(segs[i].label ? static_cast<int>(*segs[i].label) : -1);
    pts.push_back(e.embeddings[i].vector);
  }
  e.coords = tsne(pts, params);
  return e;
}

// Leading '#' lines record the t-SNE settings.
inline void write_csv(const EmbeddingExport& e, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "# tsne perplexity=" << format_double(e.tsne.perplexity) << " iterations=" << e.tsne.iterations
      << " seed=" << e.tsne.seed << '\n';
  out << "source_id,offset_s,label,tsne_x,tsne_y";
  const auto dim = e.embeddings.empty() ? 0 : e.embeddings[0].vector.size();
  for (nn::Index d = 0; d < dim; ++d) out << ",z" << d;
  out << '\n';
  for (std::size_t i = 0; i < e.ids.size(); ++i) {
    out << e.ids[i] << ',' << format_double(e.offsets_s[i]) << ','
        << (e.labels[i] >= 0 ? std::string(to_string(kAllClasses[static_cast<std::size_t>(e.labels[i])])) : "")
        << ',' << format_double(e.coords(static_cast<nn::Index>(i), 0)) << ','
        << format_double(e.coords(static_cast<nn::Index>(i), 1));
    for (nn::Index d = 0; d < dim; ++d) out << ',' << format_double(e.embeddings[i].vector(d));
    out << '\n';
  }
}

}  // namespace pcgdn::eval
