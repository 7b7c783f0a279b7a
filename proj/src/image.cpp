// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#include "mrct/image.hpp"

#include <algorithm>
#include <cmath>

namespace mrct {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io: return "io";
        case ErrorCode::format: return "format";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::empty_roi: return "empty_roi";
        case ErrorCode::numeric: return "numeric";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

const char* modality_name(Modality m) {
    return m == Modality::MR ? "MR" : "CT";
}

Modality modality_from_name(const std::string& name) {
    if (name == "MR") return Modality::MR;
    if (name == "CT") return Modality::CT;
    throw Error(ErrorCode::format, "unknown modality '" + name + "' (expected MR or CT)");
}

size_t LabelMask::foreground_count() const {
    size_t n = 0;
    for (uint8_t v : values) n += v;
    return n;
}

Slice LabelMask::to_slice() const {
    Slice s(width, height);
    for (size_t i = 0; i < values.size(); ++i) s.values[i] = values[i];
    return s;
}

void validate(const Slice& s) {
    if (s.width < 1 || s.height < 1)
        throw Error(ErrorCode::invalid_argument, "slice dimensions must be >= 1");
    if (s.values.size() != static_cast<size_t>(s.width) * s.height)
        throw Error(ErrorCode::invalid_argument, "slice value count does not match width*height");
    for (double v : s.values) {
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::invalid_argument, "slice intensity outside [0,1]");
    }
}

void validate(const LabelMask& m) {
    if (m.width < 1 || m.height < 1)
        throw Error(ErrorCode::invalid_argument, "mask dimensions must be >= 1");
    if (m.values.size() != static_cast<size_t>(m.width) * m.height)
        throw Error(ErrorCode::invalid_argument, "mask value count does not match width*height");
    for (uint8_t v : m.values) {
        if (v > 1)
            throw Error(ErrorCode::invalid_argument, "mask values must be strictly 0 or 1");
    }
}

void validate(const ImageStack& stack) {
    if (!(stack.layer_gap_mm > 0.0))
        throw Error(ErrorCode::invalid_argument, "layer_gap_mm must be positive");
    if (stack.labels.size() != stack.slices.size())
        throw Error(ErrorCode::invalid_argument, "labels list length must equal slices list length");
    for (size_t i = 0; i < stack.slices.size(); ++i) {
        const Slice& s = stack.slices[i];
        validate(s);
        if (s.width != stack.width() || s.height != stack.height())
            throw Error(ErrorCode::dimension_mismatch, "all slices in a stack must share dimensions");
        if (stack.labels[i]) {
            const LabelMask& l = *stack.labels[i];
            validate(l);
            if (l.width != s.width || l.height != s.height)
                throw Error(ErrorCode::dimension_mismatch, "label dimensions must match the slice");
        }
    }
}

void require_same_dims(const Slice& a, const Slice& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": dimension mismatch");
}

void require_same_dims(const LabelMask& a, const LabelMask& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": dimension mismatch");
}

}  // namespace mrct
