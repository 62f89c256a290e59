package com.shop.util;

public class TextHelper {
    public static String pad(String text, int width) {
        String out = text;
        while (out.length() < width) {
            out = out + " ";
        }
        return out;
    }

    public static String initials(String first, String last) {
        String a = first.substring(0, 1);
        String b = last.substring(0, 1);
        return a + b;
    }

    public static String flag(boolean on) {
        if (on) {
            return "yes";
        }
        return "off";
    }
}
