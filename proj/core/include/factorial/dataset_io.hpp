#ifndef FACTORIAL_DATASET_IO_HPP
#define FACTORIAL_DATASET_IO_HPP

// CSV interchange for observed factorial data. The format is one outcome
// column followed by one 0/1 column per factor:
//
//   y,z1,z2,...,zK
//   1.25,0,1,...,1

#include <iosfwd>
#include <string>

#include "factorial/dataset.hpp"

namespace factorial {

// Throws ParseError with a 1-based line number on malformed input.
FactorialDataset parse_dataset_csv(std::istream& in);
FactorialDataset read_dataset_csv(const std::string& path);

void write_dataset_csv(std::ostream& out, const FactorialDataset& dataset);
void write_dataset_csv(const std::string& path, const FactorialDataset& dataset);

}  // namespace factorial

#endif
