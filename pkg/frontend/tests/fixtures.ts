import type { GraphDoc } from "../src/types.js";

// Mirrors the shape of the corpus's loosely specified validation graph.
export const LOOSE_GRAPH: GraphDoc = {
  id: "loose-validation",
  signature: {
    inputs: [{ name: "proceedings", type: { kind: "domain", name: "Proceedings" } }],
    branches: {
      valid: [{ name: "valid", type: { kind: "bool" } }],
      invalid: [{ name: "valid", type: { kind: "bool" } }],
    },
  },
  implements: "ProceedingsValidation",
  nodes: {
    start: { kind: "start" },
    "topical-parts": {
      kind: "atomic",
      activityId: "all-papers-in-topical-parts?",
      inputs: [{ kind: "fromContext", var: "proceedings" }],
      outputTargets: {},
    },
    "iterate-papers": {
      kind: "atomic",
      activityId: "iterate-papers-in-proceedings",
      inputs: [{ kind: "fromContext", var: "proceedings" }],
      outputTargets: {},
    },
    "end-valid": { kind: "end", branch: "valid", outputs: [{ kind: "static", value: true }] },
    "end-invalid": { kind: "end", branch: "invalid", outputs: [{ kind: "static", value: false }] },
  },
  edges: [
    { src: "start", branch: "start", dst: "topical-parts" },
    { src: "topical-parts", branch: "yes", dst: "iterate-papers" },
    { src: "topical-parts", branch: "no", dst: "end-invalid" },
    { src: "iterate-papers", branch: "done", dst: "end-valid" },
  ],
  looseEdges: [
    {
      src: "iterate-papers",
      branch: "next",
      spec: {
        interfaceId: "ProceedingsValidation",
        candidateActivities: [],
        initiallyAvailable: ["proceedings"],
        goals: ['F "margins?"'],
        maxLength: 7,
      },
    },
  ],
};
