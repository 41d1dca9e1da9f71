#pragma once

#include <string>
#include <vector>

#include "microdepth/grid.hpp"
#include "microdepth/regress.hpp"

namespace microdepth {

struct LabelRow {
    std::string filename;
    double depth_um = 0.0;
};

// labels.csv: header `filename,depth_um`, LF endings.
std::vector<LabelRow> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<LabelRow>& rows);

// One extracted dataset: row i of X is the patch-major feature vector for
// paths[i]. All rows share patch_count (pads are zeroed, masked out).
struct FeatureTable {
    std::vector<std::string> paths;
    std::vector<double> depths;
    Matrix X;
    std::vector<std::vector<bool>> masks; // n x patch_count
    std::size_t patch_count = 0;
    std::string layout_id; // e.g. "adaptive6x4/52" or "uniform4/16"
};

// Feature CSV contract: header
//   path,depth_um,m1_p0,...,m6_p0,m1_p1,...,m6_p{P-1},mask_p0,...,mask_p{P-1}
// (patch-major, canonical metric order). Doubles are written in shortest
// round-trip form so re-extraction is byte-identical.
void write_feature_csv(const std::string& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::string& path);

// Optional per-sample deep embeddings: header `path,e0,...,e{k-1}`. Rows are
// matched to feature rows by path; missing or ragged rows are an error.
std::vector<std::vector<double>> read_embeddings_csv(const std::string& path,
                                                     const std::vector<std::string>& paths);

} // namespace microdepth
