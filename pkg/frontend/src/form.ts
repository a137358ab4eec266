// Builds a form for one IterationRequest. Widget choice derives only
// from {type, set, constraints}; nothing here knows any flow.

import {
  allowedValues,
  checkRequest,
  defaults,
  satisfies,
  type GatherElement,
  type IterationRequest,
  type ResponseEntry,
  type Scalar,
} from "./protocol";

export type SubmitHandler = (entries: ResponseEntry[]) => void;

function displayNode(label: string, value: Scalar | Scalar[], render?: string): HTMLElement {
  const row = document.createElement("div");
  row.className = "display";
  if (render === "image") {
    const caption = document.createElement("span");
    caption.textContent = label;
    const image = document.createElement("img");
    image.src = String(value);
    image.alt = label;
    row.append(caption, image);
    return row;
  }
  const caption = document.createElement("span");
  caption.textContent = label;
  const shown = document.createElement("span");
  shown.className = "value";
  shown.textContent = Array.isArray(value) ? value.join(", ") : String(value);
  row.append(caption, shown);
  return row;
}

function inputFor(element: GatherElement, preset: Scalar | undefined): HTMLInputElement {
  const input = document.createElement("input");
  input.name = element.name;
  if (element.type === "Boolean") {
    input.type = "checkbox";
    input.checked = preset === true;
    return input;
  }
  if (element.type === "Integer" || element.type === "Decimal") {
    input.type = "number";
    input.step = element.type === "Integer" ? "1" : "any";
    if (preset !== undefined) input.value = String(preset);
    return input;
  }
  input.type = "text";
  if (element.set) input.placeholder = "comma-separated";
  if (preset !== undefined) input.value = String(preset);
  return input;
}

function selectFor(
  element: GatherElement,
  allowed: Scalar[],
  preset: Scalar | undefined,
): HTMLSelectElement {
  const select = document.createElement("select");
  select.name = element.name;
  if (element.set) {
    select.multiple = true;
  } else {
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "choose...";
    placeholder.disabled = true;
    placeholder.selected = preset === undefined;
    select.append(placeholder);
  }
  for (const option of allowed) {
    const node = document.createElement("option");
    node.value = String(option);
    node.textContent = String(option);
    node.selected = preset !== undefined && String(preset) === String(option);
    select.append(node);
  }
  return select;
}

function parseScalar(text: string, type: GatherElement["type"]): Scalar {
  if (type === "Integer" || type === "Decimal") return Number(text);
  if (type === "Boolean") return text === "true";
  return text;
}

function widgetValue(
  element: GatherElement,
  widget: HTMLInputElement | HTMLSelectElement,
): Scalar | Scalar[] | undefined {
  if (widget instanceof HTMLSelectElement) {
    if (element.set) {
      return Array.from(widget.options)
        .filter((option) => option.selected)
        .map((option) => parseScalar(option.value, element.type));
    }
    if (widget.value === "") return undefined;
    return parseScalar(widget.value, element.type);
  }
  if (element.type === "Boolean") return widget.checked;
  if (element.set) {
    const trimmed = widget.value.trim();
    const parts = trimmed === "" ? [] : trimmed.split(",").map((p) => p.trim());
    return parts.map((p) => parseScalar(p, element.type));
  }
  if (widget.type === "number") {
    if (widget.value === "" || !widget.validity.valid) return undefined;
    return Number(widget.value);
  }
  return widget.value;
}

export function renderIteration(
  body: unknown,
  onSubmit: SubmitHandler,
): HTMLFormElement {
  const request = checkRequest(body);
  const presets = defaults(request);
  const form = document.createElement("form");
  form.className = "iteration";

  for (const element of request.displayElements) {
    form.append(displayNode(element.label, element.value, element.render));
  }

  const widgets = new Map<string, HTMLInputElement | HTMLSelectElement>();
  for (const element of request.gatherElements) {
    const field = document.createElement("label");
    field.className = "field";
    const caption = document.createElement("span");
    caption.textContent = element.label;
    const allowed = allowedValues(request, element.name);
    const widget = allowed
      ? selectFor(element, allowed, presets.get(element.name))
      : inputFor(element, presets.get(element.name));
    widgets.set(element.name, widget);
    field.append(caption, widget);
    form.append(field);
  }

  const error = document.createElement("p");
  error.className = "error";
  error.setAttribute("role", "alert");
  error.hidden = true;
  form.append(error);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = request.gatherElements.length === 0 ? "Continue" : "Submit";
  form.append(submit);

  const gate = () => {
    submit.disabled = !request.gatherElements.every((element) => {
      const widget = widgets.get(element.name)!;
      const value = widgetValue(element, widget);
      if (value === undefined) return false;
      const allowed = allowedValues(request, element.name);
      return allowed === undefined || satisfies(value, allowed);
    });
  };
  form.addEventListener("input", gate);
  form.addEventListener("change", gate);
  gate();

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (submit.disabled) return;
    const entries = request.gatherElements.map((element) => ({
      [element.name]: widgetValue(element, widgets.get(element.name)!)!,
    }));
    onSubmit(entries);
  });

  return form;
}

export function showFormError(form: HTMLFormElement, message: string): void {
  const slot = form.querySelector<HTMLParagraphElement>("p.error");
  if (!slot) return;
  slot.textContent = message;
  slot.hidden = false;
}
