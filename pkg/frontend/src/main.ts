import { boot } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) void boot(root);
