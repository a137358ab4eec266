// Wire types for the coordination protocol. The client consumes exactly
// the five request keys; everything it renders derives from them.

export type Scalar = number | string | boolean;

export interface GatherElement {
  name: string;
  label: string;
  set: boolean;
  type: "Integer" | "Decimal" | "String" | "Boolean";
}

export interface DisplayElement {
  name: string;
  label: string;
  type: string;
  value: Scalar | Scalar[];
  render?: string;
}

export interface Constraint {
  name: string;
  valueFrom: string;
}

export type ValueEntry = Record<string, Scalar | Scalar[]>;
export type ResponseEntry = Record<string, Scalar | Scalar[]>;

export interface IterationRequest {
  instanceId: number;
  displayElements: DisplayElement[];
  gatherElements: GatherElement[];
  constraints: Constraint[];
  value: ValueEntry[];
}

const REQUEST_KEYS = [
  "instanceId",
  "displayElements",
  "gatherElements",
  "constraints",
  "value",
] as const;

export class SchemaMismatchError extends Error {
  constructor(message: string, readonly payload: unknown) {
    super(message);
    this.name = "SchemaMismatchError";
  }
}

export function checkRequest(body: unknown): IterationRequest {
  if (typeof body !== "object" || body === null || Array.isArray(body)) {
    throw new SchemaMismatchError("request is not an object", body);
  }
  const record = body as Record<string, unknown>;
  for (const key of REQUEST_KEYS) {
    if (!(key in record)) {
      throw new SchemaMismatchError(`request missing key ${key}`, body);
    }
  }
  const request = record as unknown as IterationRequest;
  const names = new Set(request.gatherElements.map((e) => e.name));
  const lists = valueLists(request);
  for (const constraint of request.constraints) {
    if (!names.has(constraint.name)) {
      throw new SchemaMismatchError(
        `constraint targets unknown element ${constraint.name}`,
        body,
      );
    }
    if (!lists.has(constraint.valueFrom)) {
      throw new SchemaMismatchError(
        `constraint references missing value list ${constraint.valueFrom}`,
        body,
      );
    }
  }
  return request;
}

export function valueLists(request: IterationRequest): Map<string, Scalar[]> {
  const lists = new Map<string, Scalar[]>();
  for (const entry of request.value) {
    for (const [key, value] of Object.entries(entry)) {
      if (Array.isArray(value)) lists.set(key, value);
    }
  }
  return lists;
}

export function defaults(request: IterationRequest): Map<string, Scalar> {
  const found = new Map<string, Scalar>();
  for (const entry of request.value) {
    for (const [key, value] of Object.entries(entry)) {
      if (!Array.isArray(value)) found.set(key, value);
    }
  }
  return found;
}

export function constraintFor(
  request: IterationRequest,
  name: string,
): Constraint | undefined {
  return request.constraints.find((c) => c.name === name);
}

export function allowedValues(
  request: IterationRequest,
  name: string,
): Scalar[] | undefined {
  const constraint = constraintFor(request, name);
  if (!constraint) return undefined;
  return valueLists(request).get(constraint.valueFrom);
}

export function satisfies(value: Scalar | Scalar[], allowed: Scalar[]): boolean {
  const members = Array.isArray(value) ? value : [value];
  return members.every((member) => allowed.includes(member));
}
