// Wire types for the engine's JSON/HTTP contract.

export interface TypeDoc {
  kind: string;
  name?: string;
  id?: string;
  graphKind?: string;
  literals?: string[];
}

export interface ParamDoc {
  name: string;
  type: TypeDoc;
}

export interface SignatureDoc {
  inputs: ParamDoc[];
  branches: Record<string, ParamDoc[]>;
}

export interface BindingDoc {
  kind: string;
  value?: unknown;
  var?: string;
}

export interface NodeDoc {
  kind: string;
  branch?: string;
  outputs?: BindingDoc[];
  activityId?: string;
  instanceVar?: string;
  inputs?: BindingDoc[];
  outputTargets?: Record<string, string[]>;
  graphType?: TypeDoc;
  instanceSource?: { kind: string; var?: string };
  serviceGraphId?: string;
  initInputs?: BindingDoc[];
  targetVar?: string;
}

export interface EdgeDoc {
  src: string;
  branch: string;
  dst: string;
}

export interface SynthesisSpecDoc {
  interfaceId: string;
  candidateActivities: unknown[];
  initiallyAvailable: string[];
  goals: string[];
  maxLength: number;
  allowRepeats?: boolean;
}

export interface LooseEdgeDoc {
  src: string;
  branch: string;
  spec: SynthesisSpecDoc;
}

export interface GraphDoc {
  id?: string;
  kind?: string;
  signature: SignatureDoc;
  implements?: string;
  contextDecls?: Record<string, TypeDoc>;
  nodes: Record<string, NodeDoc>;
  edges: EdgeDoc[];
  looseEdges?: LooseEdgeDoc[];
  icon?: string;
  docs?: string;
}

export interface InterfaceDoc {
  id?: string;
  kind?: string;
  signature: SignatureDoc;
  docs?: string;
}

export interface LibraryDoc {
  name: string;
  version: number;
  domainTypes: Record<string, unknown>;
  activities: Record<string, unknown>;
  interfaces: Record<string, InterfaceDoc>;
  graphs: Record<string, GraphDoc>;
}

export interface GraphSummary {
  id: string;
  implements: string | null;
  docs: string;
}

export interface TraceEventDoc {
  seq: number;
  type: string;
  graphId?: string;
  instance?: string;
  activityId?: string;
  branch?: string;
  nodeId?: string;
  reason?: string;
  var?: string;
  interfaceId?: string;
  newGraphId?: string;
  site?: { nodeId: string; branch: string };
  activities?: string[];
  error?: string;
}

export interface FrameDoc {
  graphId: string;
  instance: string;
  currentNode: string;
}

export interface RunStatusDoc {
  runId: string;
  graphId: string;
  status: string;
  reason?: string;
  error?: string;
  branch?: string;
  outputs?: unknown[];
  frames: FrameDoc[];
  stepped?: number;
}

export interface SteeringCommandDoc {
  kind: "resume" | "select-variant" | "apply-edit" | "abort";
  var?: string;
  graphId?: string;
  replacementGraphId?: string;
}

export interface SolutionDoc {
  minimalLength: number | null;
  sequences: string[][];
  graph: GraphDoc | null;
}
