#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glie/types.hpp"

namespace glie {

// Deterministic synthetic datasets over a small fixed vocabulary with
// planted entities, answers, summary sentences, relations, and marked
// segments. Records come out in the standard dataset format: for
// prompt-bearing tasks the rendered instruction words are part of the
// tokenized text and spans are offset past them.

std::vector<std::string> toy_entity_types();  // sorted label strings

std::vector<AnnotatedExample> gen_toy_examples(TaskKind task, int n, std::uint64_t seed);

} // namespace glie
