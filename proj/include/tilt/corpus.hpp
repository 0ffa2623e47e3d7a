#pragma once
// Bundled example problems with expected-result metadata.  These are the
// ground-truth instances every test layer (unit, CLI, acceptance) runs
// against; `tiltcheck corpus` lists and materializes them.

#include <map>
#include <string>
#include <vector>

namespace tilt {

struct CorpusEntry {
    std::string name;     // file stem, e.g. "ex81"
    std::string summary;  // one-line description
    std::string text;     // problem file contents
    // expected analysis facts, serialized as display strings so the CLI can
    // print them and tests can assert against parsed copies
    std::map<std::string, std::string> expected;
};

const std::vector<CorpusEntry>& corpus();

// nullptr when the name is unknown
const CorpusEntry* corpus_find(const std::string& name);

}  // namespace tilt
