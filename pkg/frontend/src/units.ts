// Screen mapping: 80 px corresponds to 25 mm of handle travel.

export const PX_PER_MM = 3.2;
export const HANDLE_LIMIT_MM = 40;

export function mmToPx(mm: number): number {
  return mm * PX_PER_MM;
}

export function pxToMm(px: number): number {
  return px / PX_PER_MM;
}

export function clampMm(mm: number): number {
  if (mm > HANDLE_LIMIT_MM) return HANDLE_LIMIT_MM;
  if (mm < -HANDLE_LIMIT_MM) return -HANDLE_LIMIT_MM;
  return mm;
}

/** Pointer x in canvas pixels to a clamped handle position in mm. */
export function pointerToHandleMm(pointerPx: number, canvasCenterPx: number): number {
  return clampMm(pxToMm(pointerPx - canvasCenterPx));
}
