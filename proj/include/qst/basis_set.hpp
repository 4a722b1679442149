#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qst/error.hpp"
#include "qst/linalg.hpp"

namespace qst {

enum class BasisType { Global, Local };

inline const char* to_string(BasisType t) {
    return t == BasisType::Global ? "global" : "local";
}

inline BasisType basis_type_from_string(const std::string& s) {
    if (s == "global") {
        return BasisType::Global;
    }
    if (s == "local") {
        return BasisType::Local;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown basis type '" + s + "' (expected global|local)");
}

/// Ordered list of orthonormal measurement bases; the columns of each unitary
/// are the basis vectors.
class BasisSet {
public:
    BasisSet(Eigen::Index dim, std::vector<ComplexMatrix> bases, std::vector<std::string> labels = {},
             BasisType type = BasisType::Global)
        : dim_(dim), bases_(std::move(bases)), labels_(std::move(labels)), type_(type) {
        if (dim_ < 1) {
            throw Error(ErrorKind::InvalidArgument, "BasisSet: dimension must be >= 1");
        }
        if (labels_.empty()) {
            labels_.resize(bases_.size());
        }
        if (labels_.size() != bases_.size()) {
            throw Error(ErrorKind::InvalidArgument, "BasisSet: one label per basis required");
        }
        for (const auto& u : bases_) {
            if (u.rows() != dim_ || u.cols() != dim_) {
                throw Error(ErrorKind::DimensionMismatch, "BasisSet: basis matrix has wrong shape");
            }
            if (unitarity_defect(u) > default_tolerances().unitary) {
                throw Error(ErrorKind::InvalidArgument, "BasisSet: basis matrix is not unitary");
            }
        }
    }

    Eigen::Index dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return bases_.size(); }
    bool empty() const noexcept { return bases_.empty(); }
    const ComplexMatrix& basis(std::size_t i) const { return bases_.at(i); }
    const std::vector<ComplexMatrix>& bases() const noexcept { return bases_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    BasisType type() const noexcept { return type_; }

    /// The first k bases.
    BasisSet prefix(std::size_t k) const {
        if (k > bases_.size()) {
            throw Error(ErrorKind::InvalidArgument, "BasisSet::prefix: not enough bases");
        }
        return BasisSet(dim_, {bases_.begin(), bases_.begin() + static_cast<std::ptrdiff_t>(k)},
                        {labels_.begin(), labels_.begin() + static_cast<std::ptrdiff_t>(k)}, type_);
    }

private:
    Eigen::Index dim_;
    std::vector<ComplexMatrix> bases_;
    std::vector<std::string> labels_;
    BasisType type_;
};

} // namespace qst
