#pragma once

#include <string_view>

// Contents of data/*.txt, compiled in by CMake (see embedded_data.cpp.in).
namespace safewatch::embedded {

extern const std::string_view kLexiconText;
extern const std::string_view kEmoticonsText;

}  // namespace safewatch::embedded
