/** DOM wiring: sliders, plane toggle, canvas, banner, plan-for-me flow.
 * All logic lives in the pure modules; this file only moves values
 * between them and the document. */

import { ApiClient, ApiRequestError } from "./api.js";
import { DEFAULT_OVERLAYS, renderHeatmap } from "./heatmap.js";
import { EnvelopeScheduler } from "./scheduler.js";
import { ViewState } from "./state.js";
import { clickToTarget, isRejected } from "./targets.js";
import type { EnvelopePayload, Plane } from "./types.js";

const API_BASE = (window as unknown as { TIFL_API?: string }).TIFL_API ?? "http://127.0.0.1:8754";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const state = new ViewState();
  const client = new ApiClient(API_BASE);
  const canvas = el<HTMLCanvasElement>("heatmap");
  const banner = el<HTMLDivElement>("banner");
  const planBox = el<HTMLDivElement>("plan-result");
  const readout = el<HTMLDivElement>("readout");

  const scheduler = new EnvelopeScheduler<EnvelopePayload>({
    send: (request) => client.envelope(request),
    onResult: (payload) => state.showPayload(payload),
    onError: (error) => {
      const message =
        error instanceof ApiRequestError
          ? `${error.status}: ${error.message}`
          : String(error);
      state.showError(message);
    },
  });

  const sliders = {
    phi: el<HTMLInputElement>("phi"),
    alpha: el<HTMLInputElement>("alpha"),
    psi: el<HTMLInputElement>("psi"),
    ratio: el<HTMLInputElement>("ratio"),
  };

  function sliderValues() {
    return {
      phi: Number(sliders.phi.value),
      alpha: Number(sliders.alpha.value),
      psi: Number(sliders.psi.value),
      // the ratio slider is log2-scaled so r and 1/r sit symmetrically
      ratio: 2 ** Number(sliders.ratio.value),
    };
  }

  function pushSliders(dragging: boolean): void {
    state.setSliders(sliderValues());
    state.setPending(true);
    scheduler.request({ montage: state.montage(), plane: state.plane }, dragging);
  }

  for (const input of Object.values(sliders)) {
    input.addEventListener("input", () => pushSliders(true));
    input.addEventListener("change", () => pushSliders(false));
  }

  for (const plane of ["xy", "xz"] as Plane[]) {
    el<HTMLInputElement>(`plane-${plane}`).addEventListener("change", () => {
      state.setPlane(plane);
      state.setPending(true);
      scheduler.requestNow({ montage: state.montage(), plane });
    });
  }

  canvas.addEventListener("click", (event) => {
    if (!state.payload) return;
    const rect = canvas.getBoundingClientRect();
    const n = state.payload.resolution;
    const col = Math.floor(((event.clientX - rect.left) / rect.width) * n);
    const row = Math.floor(((event.clientY - rect.top) / rect.height) * n);
    const outcome = clickToTarget(
      col, row, n, state.payload.radius, state.plane, state.bounds.depth_bands,
    );
    if (isRejected(outcome)) {
      state.showError(`plan rejected: ${outcome.reason}`);
      return;
    }
    state.showError("planning...");
    client.plan({ target: outcome.point }).then(
      (result) => {
        state.banner = null;
        state.showPlanResult(result);
      },
      (error) => {
        const message =
          error instanceof ApiRequestError
            ? `${error.status} ${error.kind}: ${error.message}`
            : String(error);
        state.showError(`plan failed: ${message}`);
      },
    );
  });

  el<HTMLButtonElement>("apply-plan").addEventListener("click", () => {
    if (state.planResult && state.applyPlanResult(state.planResult)) {
      syncSliderInputs();
      state.setPending(true);
      scheduler.requestNow({ montage: state.montage(), plane: state.plane });
    }
  });

  function syncSliderInputs(): void {
    sliders.phi.value = String(state.sliders.phi);
    sliders.alpha.value = String(state.sliders.alpha);
    sliders.psi.value = String(state.sliders.psi);
    sliders.ratio.value = String(Math.log2(state.sliders.ratio));
  }

  state.subscribe(() => {
    banner.textContent = state.banner ?? "";
    banner.style.display = state.banner ? "block" : "none";
    readout.textContent =
      `phi=${state.sliders.phi.toFixed(1)}  alpha=${state.sliders.alpha.toFixed(1)}  ` +
      `psi=${state.sliders.psi.toFixed(1)}  I_L/I_R=${state.sliders.ratio.toFixed(2)}` +
      (state.pending ? "  (updating...)" : "");
    if (state.payload) {
      const raster = renderHeatmap(state.payload, {
        ...DEFAULT_OVERLAYS,
        bandEdges: state.bounds.depth_bands,
        regionGrid: state.overlays.regionGrid,
        depthBands: state.overlays.depthBands,
        focalMarker: state.overlays.focalMarker,
      });
      canvas.width = raster.width;
      canvas.height = raster.height;
      const ctx = canvas.getContext("2d");
      if (ctx) {
        const image = ctx.createImageData(raster.width, raster.height);
        image.data.set(raster.data);
        ctx.putImageData(image, 0, 0);
      }
      const f = state.payload.focal;
      el<HTMLDivElement>("focal").textContent =
        `peak ${f.peak.toExponential(3)} V/m at (${f.argmax.map((v) => v.toFixed(2)).join(", ")}) ` +
        `-> ${f.region}/${f.depth}, extent ${(100 * f.extent).toFixed(1)}%`;
    }
    if (state.planResult) {
      const p = state.planResult.montage.parameters;
      planBox.style.display = "block";
      planBox.querySelector("pre")!.textContent = p
        ? `phi=${p.phi.toFixed(1)} alpha=${p.alpha.toFixed(1)} psi=${p.psi.toFixed(1)} ` +
          `I_L/I_R=${(p.i_left / p.i_right).toFixed(2)}\n` +
          `envelope at target ${state.planResult.envelope_at_target.toExponential(3)} V/m, ` +
          `focality ${state.planResult.focality_ratio.toFixed(2)}, ` +
          `safety ${state.planResult.safety.passed ? "pass" : "VIOLATED"}`
        : "(asymmetric montage; see console)";
    } else {
      planBox.style.display = "none";
    }
  });

  client.scenarios().then(
    (payload) => {
      state.setBounds(payload.bounds);
      sliders.phi.min = String(payload.bounds.phi.min);
      sliders.phi.max = String(payload.bounds.phi.max);
      sliders.alpha.min = String(payload.bounds.alpha.min);
      sliders.alpha.max = String(payload.bounds.alpha.max);
      sliders.psi.min = String(payload.bounds.psi.min);
      sliders.psi.max = String(payload.bounds.psi.max);
      sliders.ratio.min = String(Math.log2(payload.bounds.ratio.min));
      sliders.ratio.max = String(Math.log2(payload.bounds.ratio.max));
      state.setPending(true);
      scheduler.requestNow({ montage: state.montage(), plane: state.plane });
    },
    (error) => state.showError(`cannot reach the API at ${API_BASE}: ${error}`),
  );
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", main);
}
