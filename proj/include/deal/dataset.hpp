#pragma once

// Sparse text datasets ("label idx:val idx:val ..."), train/test splits and
// the initial labelled seed set.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "deal/matrix.hpp"

namespace deal {

struct Dataset {
    Matrix features;                       // M x d, dense
    std::vector<int> labels;               // class ids 0..C-1
    std::vector<std::string> class_names;  // original label token per class id

    std::size_t size() const { return labels.size(); }
    std::size_t dims() const { return features.cols(); }
    std::size_t classes() const { return class_names.size(); }
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

Dataset parse_sparse(std::istream& in);
Dataset parse_sparse_file(const std::string& path);

// Canonical form: original label token, then nonzero features with
// shortest-round-trip values.
void write_sparse(std::ostream& out, const Dataset& data);

// Rows selected by id, keeping the class table so ids stay comparable.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& ids);

struct Split {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_ids;  // row ids into the source dataset
    std::vector<std::size_t> test_ids;
};

// Seeded permutation; the first ceil(fraction * M) rows become the train pool.
Split split(const Dataset& data, double train_fraction, std::uint64_t seed);

// Per-feature min-max scaling to [0,1] fitted on one set and applied to others.
struct MinMaxScaler {
    std::vector<double> lo;
    std::vector<double> hi;

    static MinMaxScaler fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
};

struct PoolPartition {
    std::vector<std::size_t> labeled;    // row ids into the train pool
    std::vector<std::size_t> unlabeled;  // ascending
    bool degenerate = false;             // fewer than two classes labelled
};

// One uniformly chosen labelled instance per class present in the pool.
PoolPartition seed_initial_labels(const Dataset& train_pool, std::uint64_t seed);

}  // namespace deal
