package com.solo;

public class Greeting {
    public static String text() {
        return "hello";
    }
}
