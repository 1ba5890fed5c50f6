#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ooc/detection.hpp"

namespace ooc {

// Ordered bag-of-words over detected object labels. Labels are unique and
// sorted ascending so the sparse-vector dimensionality and persistence are
// deterministic. The id is a content hash used to pair vectors with the
// vocabulary that produced them.
class Vocabulary {
public:
    Vocabulary() = default;
    static Vocabulary from_labels(std::vector<std::string> labels);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }  // w
    std::optional<std::size_t> index_of(const std::string& label) const;
    const std::string& id() const { return id_; }

    bool operator==(const Vocabulary&) const = default;

private:
    std::vector<std::string> labels_;
    std::string id_;
};

struct VocabularyBuild {
    Vocabulary vocabulary;
    std::string warning;  // empty when nothing to report
};

// Unions all labels across the records. With remove_common set and at least
// two records, labels present in every record are dropped; with a single
// record the removal is skipped and a warning returned instead, since it
// would always empty the vocabulary. Empty input raises ValidationError.
VocabularyBuild build_vocabulary(const std::vector<DetectionRecord>& records,
                                 bool remove_common);

// Sparse confidence vector in R^w. Only nonzero entries are stored; the
// dense expansion has exactly w components.
struct SparseVector {
    std::string image_id;
    std::string vocab_id;
    std::size_t dim = 0;
    std::map<std::size_t, double> entries;

    std::vector<double> dense() const;

    bool operator==(const SparseVector&) const = default;
};

// Projects a record onto the vocabulary. Labels outside the vocabulary are
// dropped; zero confidences are not stored.
SparseVector vectorize(const DetectionRecord& record, const Vocabulary& vocab);

// Batch variants. The default runs the per-record loop under OpenMP; the
// serial one is the reference used by tests and the benchmark. Both return
// results in input order.
std::vector<SparseVector> vectorize_batch(std::span<const DetectionRecord> records,
                                          const Vocabulary& vocab);
std::vector<SparseVector> vectorize_batch_serial(std::span<const DetectionRecord> records,
                                                 const Vocabulary& vocab);

// Labels considered natural for the image domain; everything else is
// out-of-context evidence.
struct ContextWhitelist {
    std::set<std::string> labels;

    bool contains(const std::string& label) const { return labels.count(label) != 0; }
    bool operator==(const ContextWhitelist&) const = default;
};

// The stock whitelist for portrait-style face images.
ContextWhitelist default_face_whitelist();

// Partitions a record into (in-context, out-of-context) by whitelist
// membership. Confidences are preserved and the two parts reassemble the
// input exactly.
std::pair<DetectionRecord, DetectionRecord> ooc_split(const DetectionRecord& record,
                                                      const ContextWhitelist& whitelist);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

// Vocabulary file: header line "ooc-vocab v1 w=<n>" followed by one label
// per line. A different version raises CompatibilityError.
std::string write_vocabulary(const Vocabulary& vocab);
Vocabulary parse_vocabulary(std::string_view text);

// Vector file: JSON array of {"image_id", "vocab_id",
// "entries": [{"index", "value"}]}. Reading against a vocabulary whose id
// differs from the stored vocab_id raises CompatibilityError.
std::string write_vectors(const std::vector<SparseVector>& vectors);
std::vector<SparseVector> parse_vectors(std::string_view text, const Vocabulary& expected);

// Whitelist file: one canonical label per line, '#' lines are comments.
std::string write_whitelist(const ContextWhitelist& whitelist);
ContextWhitelist parse_whitelist(std::string_view text);

}  // namespace ooc
