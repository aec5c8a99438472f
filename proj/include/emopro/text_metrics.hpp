// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emopro {

/// Code points of `text` after NFKC, lowercasing, and removal of all
/// whitespace and punctuation. Invalid UTF-8 is replaced, not rejected.
std::u32string normalize_for_cer(std::string_view text);

/// Levenshtein distance (unit insert/delete/substitute) over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

/// edit_distance(norm(reference), norm(hypothesis)) / |norm(reference)|.
/// May exceed 1. Errors: Errc::invalid_argument when the normalized
/// reference is empty.
double compute_cer(std::string_view reference, std::string_view hypothesis);

/// a.b / (|a| |b|), clamped to [-1, 1]. Errors: Errc::invalid_argument on
/// length mismatch, empty input, or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace emopro
