#ifndef PTK_CORPUS_HPP
#define PTK_CORPUS_HPP

#include <random>
#include <string>
#include <vector>

#include "ptk/pebble.hpp"

namespace ptk::corpus {

class CorpusError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Reverses every #-separated block; letters are the block alphabet.
std::shared_ptr<const TwoWayTransducer> maprev_transducer(const std::string& letters = "abcd");
PebbleMachine maprev(const std::string& letters = "abcd");
PebbleMachine copier();
PebbleMachine ulsq();
PebbleMachine square();
PebbleMachine zebra(int k);

// Height 2 and 3 machines exercising both outcomes of the minimization loop.
std::vector<PebbleMachine> blind_family();
std::vector<PebbleMachine> last_family();

std::vector<std::string> names();
PebbleMachine make(const std::string& name);
// Every machine of the corpus, in a fixed order.
std::vector<PebbleMachine> all();

// u_1#...#u_n -> (u_1#)^n ... (u_n#)^n
std::string isq_ref(const std::string& u);

// Trees use '<' and '>' as brackets; leaves are '<' label '>'.
bool is_tree_word(const std::string& t, int height);
std::string reference_zebra(int k, const std::string& tree);
std::string random_tree(std::mt19937& rng, int height, int max_children, int max_label);

}  // namespace ptk::corpus

#endif
