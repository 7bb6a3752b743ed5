// Entry point for the injectable bundle. The build wraps this into an IIFE
// and appends a `return` of extract(), producing a script body suitable for
// the WebDriver execute-sync endpoint.

export { extract, normalizeText, ID_ATTR, FORMAT_VERSION } from "./extractor";
