#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "darmois/automorphism.hpp"
#include "darmois/charfn.hpp"
#include "darmois/construct.hpp"
#include "darmois/sampling.hpp"
#include "darmois/sd.hpp"
#include "darmois/solver.hpp"

// JSON and CSV serialization. Schemas (arrays of numbers unless noted):
//   group        {"factors":[{"kind":"real"|"circle"|"cyclic"|"integers",
//                 "n":<int, cyclic only>}]}
//   automorphism {"alpha":[[..]],"v":[..] or [[..]],"signs":[..],"units":[..]}
//                (missing blocks default to the identity; "v" may be flat
//                 when there is exactly one cross vector)
//   charfn       {"kind":"closed","group":{..},"shift":[..],"Q":[[..]],
//                 "kappa":<num|null>,"which":1|2|null}
//              | {"kind":"tabulated","group":{..},"grid":[axis..],
//                 "values":[[re,im],..]}  with axis descriptors
//                 {"kind":"real","lo":..,"hi":..,"step":..} |
//                 {"kind":"integers","lo":..,"hi":..} | {"kind":"cyclic","n":..};
//                 values are row-major, last axis fastest
//   instance     {"group":{..},"components":[charfn..],"alphas":[..],"betas":[..]}
//   params       {"a":..,"Q1":[[..]],"Q2":[[..]],"kappa":..,"x1":[..],"x2":[..],
//                 "delta":{automorphism}}
//   finite job   {"group":{..},"delta":{..},"mode":"grid"|"opt", and optional
//                 tolerance/grid_step/restarts/max_iters/seed/nonvanish_eps/
//                 dedup_eps}
namespace darmois::io {

using json = nlohmann::json;

json to_json(const LcaGroup& g);
LcaGroup group_from_json(const json& j);

json to_json(const Automorphism& a);
Automorphism automorphism_from_json(const json& j, const LcaGroup& group);

json to_json(const CharFn& f);
CharFn charfn_from_json(const json& j);

json to_json(const SdReport& r);
json to_json(const PdReport& r);
json to_json(const CosetDecomposition& d);
json to_json(const IndependenceReport& r);
json to_json(const ReductionTrace& t);
json to_json(const CharacterizationReport& r);

json instance_to_json(const SdInstance& inst);
SdInstance instance_from_json(const json& j);

json params_to_json(const PairParams& p);
PairParams params_from_json(const json& j);

json finite_instance_to_json(const FiniteInstance& inst);
FiniteInstance finite_instance_from_json(const json& j);

json records_to_json(const FiniteInstance& inst, const std::vector<SolutionRecord>& recs);
std::string records_to_csv(const FiniteInstance& inst,
                           const std::vector<SolutionRecord>& recs);

std::string samples_to_csv(const LcaGroup& g, const std::vector<Element>& samples);

// file helpers; all throw InputError with the path in the message
json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);
void save_text_file(const std::string& path, const std::string& text);

}  // namespace darmois::io
